"""Shared fixtures: the reference converter, random parameter draws, config files."""

from __future__ import annotations

import dataclasses
import json

import numpy as np
import pytest

from dabss import RECTIFY, DabParams, build_dab, half_cycle_model
from dabss.pwlti import segment_map

# Reference design used throughout the suite. Values chosen so every regime
# the package cares about is exercised: lossy transformer path, nonzero ESR,
# moderate load, ~1% per-period damping.
REFERENCE_KWARGS = dict(
    n_turns=1.0,
    L=10e-6,
    Co=100e-6,
    Rt=0.05,
    Rc=0.01,
    Ro=10.0,
    Vin=100.0,
    fs=100e3,
    D_phase=0.3,
    Vr=1.0,
)


@pytest.fixture(scope="session")
def ref_params() -> DabParams:
    return DabParams(**REFERENCE_KWARGS)


@pytest.fixture(scope="session")
def ref_dab(ref_params):
    return build_dab(ref_params)


def random_params(rng: np.random.Generator) -> DabParams:
    """One random but physically reasonable converter.

    Ranges are wide enough to vary damping and turns ratio by an order of
    magnitude while keeping every draw comfortably stable (spectral radius
    of the period map below one) so fixed-point solves stay well posed.
    """
    return DabParams(
        n_turns=float(rng.uniform(0.5, 2.0)),
        L=float(rng.uniform(5e-6, 50e-6)),
        Co=float(rng.uniform(20e-6, 500e-6)),
        Rt=float(rng.uniform(0.01, 0.5)),
        Rc=float(rng.uniform(0.0, 0.05)),
        Ro=float(rng.uniform(2.0, 50.0)),
        Vin=float(rng.uniform(20.0, 400.0)),
        fs=float(rng.uniform(20e3, 500e3)),
        D_phase=float(rng.uniform(0.05, 0.45)),
        Vr=float(rng.uniform(0.5, 5.0)),
    )


def fd_sensitivities(dab, surface, delta: float = 1e-9):
    """Central-difference duration sensitivities of the rectified end state.

    Recomputes the half-cycle end state with each duration nudged by +-delta
    seconds, holding the fixed point where it was; returns the model together
    with the two difference quotients. This is the independent cross-check of
    the analytic sens_a / sens_b vectors.
    """
    model = half_cycle_model(dab, surface)
    seg_a = dab.schedule.segments[surface.a - 1]
    seg_b = dab.schedule.segments[surface.b - 1]
    u = dab.schedule.u

    def end_state(da: float, db: float) -> np.ndarray:
        ma = segment_map(dataclasses.replace(seg_a, duration=seg_a.duration + da), u)
        mb = segment_map(dataclasses.replace(seg_b, duration=seg_b.duration + db), u)
        return RECTIFY @ (mb.phi @ (ma.phi @ model.x_star + ma.gamma) + mb.gamma)

    fd_a = (end_state(delta, 0.0) - end_state(-delta, 0.0)) / (2.0 * delta)
    fd_b = (end_state(0.0, delta) - end_state(0.0, -delta)) / (2.0 * delta)
    return model, fd_a, fd_b


def write_config(path, *, converter=None, sim=None, sweep=None, tolerances=None,
                 extra=None) -> str:
    """Write a JSON config file and return its path as str."""
    doc = {"converter": dict(REFERENCE_KWARGS if converter is None else converter)}
    if sim is not None:
        doc["sim"] = sim
    if sweep is not None:
        doc["sweep"] = sweep
    if tolerances is not None:
        doc["tolerances"] = tolerances
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


@pytest.fixture()
def config_file(tmp_path):
    """Factory fixture: build config files inside the test's tmp dir."""
    counter = {"n": 0}

    def make(**kwargs) -> str:
        counter["n"] += 1
        return write_config(tmp_path / f"config_{counter['n']}.json", **kwargs)

    return make
