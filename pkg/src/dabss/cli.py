"""Command line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration problem,
3 marginal or singular system, 4 simulator non-convergence, 5 injection
amplitude violation. Result data goes to output files (or stdout for the
verify table); diagnostics go to stderr. File writes are
write-temp-then-rename so a failing command never leaves partial output,
and all output is byte deterministic for identical inputs.
"""

from __future__ import annotations

import argparse
import cmath
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import AppConfig, load_config
from .dab import FLIP_CURRENT, DabSchedule, build_dab, solve_half_cycle, verify_symmetry
from .errors import (AmplitudeError, ConfigError, ConvergenceError, MarginalSystemError,
                     ResolventSingularityError, SimilarityError)
from .oracle import Injection, measure_frequency_response, run_to_steady_state
from .pwlti import (IdentityCheck, closed_form_state, monodromy, propagate,
                    relative_residual, solve_periodic_fixed_point)
from .smallsignal import (P_MINUS, P_PLUS, S_MINUS, S_PLUS, SURFACES, bode_sweep,
                          difference_envelope, half_cycle_model,
                          resolvent_similarity_residual, sweep_frequencies,
                          transfer_difference_residual, transfer_fixed_freq,
                          transfer_same_cycle, verify_surface_equivalence)

_VERIFY_SEED = 20260816


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _wrap_degrees(angle: float) -> float:
    wrapped = (angle + 180.0) % 360.0 - 180.0
    return 180.0 if wrapped == -180.0 else wrapped


def _build_dab(cfg: AppConfig) -> DabSchedule:
    return build_dab(cfg.converter, t3_skew=cfg.t3_skew)


def _surface(cfg: AppConfig, label: str):
    base = SURFACES[label]
    if label in cfg.polarity_override:
        return dataclasses.replace(base, polarity=cfg.polarity_override[label])
    return base


def cmd_steady_state(args) -> int:
    cfg = load_config(args.config)
    dab = _build_dab(cfg)
    if args.method == "full":
        x_star = solve_periodic_fixed_point(dab.schedule)
    else:
        x_star = solve_half_cycle(dab)
    residual = relative_residual(closed_form_state(dab.schedule, x_star), x_star)
    eigs = sorted(np.linalg.eigvals(monodromy(dab.schedule)),
                  key=lambda e: (e.real, e.imag))
    eig_rows = ",\n    ".join(f"[{_fmt(e.real)}, {_fmt(e.imag)}]" for e in eigs)
    text = (
        "{\n"
        f"  \"eigenvalues_of_Pi\": [\n    {eig_rows}\n  ],\n"
        f"  \"method\": \"{args.method}\",\n"
        f"  \"residual\": {_fmt(residual)},\n"
        f"  \"x_star\": [{_fmt(x_star[0])}, {_fmt(x_star[1])}]\n"
        "}\n")
    _atomic_write(Path(args.out), text)
    return 0


def _verify_checks(cfg: AppConfig) -> list[IdentityCheck]:
    dab = _build_dab(cfg)
    tol = cfg.tolerances
    checks = list(verify_symmetry(dab, rtol=tol.half_wave_symmetry))

    x_full = solve_periodic_fixed_point(dab.schedule)
    x_half = solve_half_cycle(dab)
    states = propagate(dab.schedule, x_full)
    checks.append(IdentityCheck(
        "half-cycle/fixed-point-equivalence", relative_residual(x_half, x_full), tol.half_cycle))
    checks.append(IdentityCheck(
        "half-cycle/period-closure", relative_residual(states[-1], x_full), tol.half_cycle))
    checks.append(IdentityCheck(
        "half-cycle/midcycle-flip", relative_residual(states[1], FLIP_CURRENT @ x_full),
        tol.half_cycle))

    rng = np.random.default_rng(_VERIFY_SEED)
    worst = 0.0
    draws = 0
    while draws < 20:
        a = rng.standard_normal((2, 2))
        t_mat = rng.standard_normal((2, 2))
        z = 2.0 * cmath.exp(2j * math.pi * rng.uniform())
        if np.linalg.cond(t_mat) > 1e6 or np.min(np.abs(z - np.linalg.eigvals(a))) < 0.1:
            continue
        worst = max(worst, resolvent_similarity_residual(a, t_mat, z))
        draws += 1
    checks.append(IdentityCheck("resolvent/similarity-random", worst, tol.resolvent_identity))

    z_grid = [cmath.exp(2j * math.pi * q / 64) for q in range(64)]
    for primary, secondary in ((P_PLUS, S_PLUS), (P_MINUS, S_MINUS)):
        pri = _surface(cfg, primary.label)
        sec = _surface(cfg, secondary.label)
        try:
            checks.extend(verify_surface_equivalence(
                dab, pri, sec, z_grid,
                rtol=tol.surface_equivalence, similarity_rtol=tol.similarity))
        except ValueError as exc:
            # A skewed schedule can make a straddling surface unbuildable;
            # report that as a failing check instead of aborting the table.
            checks.append(IdentityCheck(
                f"surface-equiv/{pri.label}~{sec.label}/construction",
                math.inf, tol.surface_equivalence, str(exc)))

    model = half_cycle_model(dab, _surface(cfg, "P+"))
    dual = max(transfer_difference_residual(model, dab.c_phys,
                                            cmath.exp(2j * math.pi * q / 100))
               for q in range(100))
    checks.append(IdentityCheck(
        "transfer-difference/dual-path", dual, tol.transfer_difference))
    dc = transfer_fixed_freq(model, dab.c_phys, 1.0) - \
        transfer_same_cycle(model, dab.c_phys, 1.0)
    checks.append(IdentityCheck(
        "transfer-difference/dc-zero", float(np.linalg.norm(dc)), tol.transfer_difference))
    ratio = 0.0
    for f in sweep_frequencies(cfg.sweep.f_min, cfg.sweep.f_max, cfg.sweep.points,
                               cfg.sweep.spacing, model.t_half):
        z = cmath.exp(2j * math.pi * f * model.t_half)
        delta = transfer_fixed_freq(model, dab.c_phys, z) - \
            transfer_same_cycle(model, dab.c_phys, z)
        bound = difference_envelope(model, dab.c_phys, z)
        ratio = max(ratio, float(np.linalg.norm(delta)) / bound)
    checks.append(IdentityCheck("transfer-difference/envelope-ratio", ratio, 1.0))
    return checks


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    checks = _verify_checks(cfg)
    width = max(len(c.name) for c in checks)
    lines = [f"{'identity':<{width}}  {'residual':>12}  {'tolerance':>12}  status"]
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        note = f"  [{c.note}]" if c.note else ""
        lines.append(f"{c.name:<{width}}  {c.residual:>12.3e}  {c.tolerance:>12.3e}  {status}{note}")
    failing = [c.name for c in checks if not c.passed]
    n_pass = len(checks) - len(failing)
    lines.append(f"RESULT: {'PASS' if not failing else 'FAIL'} ({n_pass}/{len(checks)})")
    for name in failing:
        lines.append(f"FAILED: {name}")
    print("\n".join(lines))
    return 1 if failing else 0


def cmd_bode(args) -> int:
    cfg = load_config(args.config)
    dab = _build_dab(cfg)
    surface = _surface(cfg, args.surface)
    sweep = cfg.sweep
    kinds = ("fix", "sc") if args.model == "both" else (args.model,)
    per_kind = {kind: bode_sweep(dab, surface, kind, sweep.f_min, sweep.f_max,
                                 sweep.points, sweep.spacing) for kind in kinds}
    header = "f_hz,mag_db_irec,phase_deg_irec,mag_db_vout,phase_deg_vout"
    if args.model == "both":
        header += ",model"
    lines = [header]
    for idx in range(sweep.points):
        for kind in kinds:
            row = per_kind[kind][idx]
            if row.flagged:
                print(f"warning: sweep point {_fmt(row.f)} Hz sits on a pole, row flagged",
                      file=sys.stderr)
                cells = [_fmt(row.f), "", "", "", ""]
            else:
                cells = [_fmt(row.f)]
                for h in (row.h_irec, row.h_vout):
                    cells.append(_fmt(20.0 * math.log10(abs(h))))
                    cells.append(_fmt(math.degrees(cmath.phase(h))))
            if args.model == "both":
                cells.append(kind)
            lines.append(",".join(cells))
    _atomic_write(Path(args.out), "\n".join(lines) + "\n")
    return 0


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    dab = _build_dab(cfg)
    _, waveform = run_to_steady_state(dab, cfg.sim)
    lines = ["t,i_L,v_C,i_rec,v_out"]
    for t, x, y in zip(waveform.t, waveform.x, waveform.y):
        lines.append(",".join(_fmt(v) for v in (t, x[0], x[1], y[0], y[1])))
    _atomic_write(Path(args.out), "\n".join(lines) + "\n")
    return 0


def _coherent_frequencies(cfg: AppConfig, injection: Injection, t_half: float) -> list[float]:
    # Snap every sweep point to the coherent bin grid m / (measure_periods * Ts),
    # keeping 1 <= m < measure_periods so the injected sinusoid never lands on
    # dc or on the surface Nyquist point.
    period = cfg.converter.period
    window = injection.measure_periods * period
    bins = []
    for f in sweep_frequencies(cfg.sweep.f_min, cfg.sweep.f_max, cfg.sweep.points,
                               cfg.sweep.spacing, t_half):
        m = min(max(1, round(f * window)), injection.measure_periods - 1)
        if m not in bins:
            bins.append(m)
    return [m / window for m in sorted(bins)]


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    dab = _build_dab(cfg)
    surface = _surface(cfg, "P+")
    model = half_cycle_model(dab, surface)

    x_model = solve_periodic_fixed_point(dab.schedule)
    x_sim, _ = run_to_steady_state(dab, cfg.sim)
    steady_dev = relative_residual(x_sim, x_model)

    injection = cfg.sim.injection if cfg.sim.injection is not None else Injection()
    lines = [
        f"# x_star=[{_fmt(x_model[0])}, {_fmt(x_model[1])}]",
        f"# steady_state_rel_dev={_fmt(steady_dev)}",
        "f_hz,mag_ratio_irec,phase_diff_deg_irec,mag_ratio_vout,phase_diff_deg_vout",
    ]
    for f in _coherent_frequencies(cfg, injection, model.t_half):
        cfg_f = dataclasses.replace(cfg.sim, injection=dataclasses.replace(injection, f=f))
        measured = measure_frequency_response(dab, surface, cfg_f)
        z = cmath.exp(2j * math.pi * f * model.t_half)
        predicted = transfer_fixed_freq(model, dab.c_phys, z)
        cells = [_fmt(f)]
        for pred, meas in zip(predicted, measured):
            cells.append(_fmt(abs(pred) / abs(meas)))
            cells.append(_fmt(_wrap_degrees(math.degrees(cmath.phase(pred) - cmath.phase(meas)))))
        lines.append(",".join(cells))
    _atomic_write(Path(args.out), "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dabss",
        description="Steady-state and sampled small-signal analysis of a dual active bridge.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady-state", help="periodic fixed point and monodromy eigenvalues")
    p.add_argument("config")
    p.add_argument("--method", choices=("full", "half"), default="full")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_steady_state)

    p = sub.add_parser("verify", help="run every structural identity check")
    p.add_argument("config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bode", help="frequency response CSV of one sampling surface")
    p.add_argument("config")
    p.add_argument("--surface", choices=sorted(SURFACES), default="P+")
    p.add_argument("--model", choices=("fix", "sc", "both"), default="fix")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("simulate", help="steady-state waveform CSV from the simulator")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="closed-form model against injected-sinusoid measurement")
    p.add_argument("config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MarginalSystemError, ResolventSingularityError, SimilarityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except AmplitudeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
