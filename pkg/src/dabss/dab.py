"""Four-interval piecewise-LTI model of a dual active bridge converter.

State is x = [i_L, v_C] (primary-referred series inductor current, output
capacitor voltage). One switching period splits into four subintervals set
by the bridge switch pattern; the pattern repeats with half-wave symmetry,
which is what the involution constants below encode:

* intervals 1 and 4 share the forward state matrix, intervals 2 and 3 the
  reversed one (both off-diagonal couplings flip sign),
* the input column flips sign between the first and second half cycle,
* durations satisfy T1 = T3 and T2 = T4.

Those structural facts make the second half cycle a sign-conjugated copy of
the first, so a half-cycle solve with a current-flip boundary condition
reproduces the full-period steady state. `verify_symmetry` measures the
conjugation identities numerically instead of trusting the construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import pwlti
from .errors import DimensionError, MarginalSystemError, ParameterError
from .pwlti import IdentityCheck, Schedule, Segment, relative_residual, segment_maps

# Involutions of the [i_L, v_C] state.
# FLIP_VOLTAGE conjugates the reversed-coupling intervals onto the forward
# ones; FLIP_CURRENT is the half-wave symmetry boundary condition; RECTIFY
# is the fixed inductor-current sign flip used by the sampled-data models.
FLIP_VOLTAGE = pwlti._frozen_array([[1.0, 0.0], [0.0, -1.0]])
FLIP_CURRENT = pwlti._frozen_array([[-1.0, 0.0], [0.0, 1.0]])
RECTIFY = pwlti._frozen_array([[-1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class DabParams:
    """Physical converter parameters, SI units throughout.

    n_turns  transformer turns ratio (primary:secondary = n:1)
    L        series inductance, primary referred [H]
    Co       output filter capacitance [F]
    Rt       series resistance of the transformer path [ohm]
    Rc       output capacitor ESR [ohm]
    Ro       load resistance [ohm]
    Vin      dc input voltage [V]
    fs       switching frequency [Hz]
    D_phase  phase-shift duty ratio, fraction of a half cycle in (0, 1)
    Vr       modulator ramp amplitude [V]
    """

    n_turns: float
    L: float
    Co: float
    Rt: float
    Rc: float
    Ro: float
    Vin: float
    fs: float
    D_phase: float
    Vr: float

    def __post_init__(self):
        for name in ("n_turns", "L", "Co", "Ro", "fs", "Vr"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
        for name in ("Rt", "Rc"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ParameterError(f"{name} must be finite and >= 0, got {value!r}")
        if not math.isfinite(self.Vin):
            raise ParameterError(f"Vin must be finite, got {self.Vin!r}")
        if not (math.isfinite(self.D_phase) and 0.0 < self.D_phase < 1.0):
            raise ParameterError(f"D_phase must lie in (0, 1), got {self.D_phase!r}")

    @property
    def period(self) -> float:
        return 1.0 / self.fs

    @property
    def t_half(self) -> float:
        return 0.5 / self.fs


@dataclass(frozen=True)
class DabSchedule:
    """A converter schedule bundled with its output matrices.

    `c_intervals` holds the per-interval output matrices used for waveform
    reconstruction (their first row carries the rectifier sign of each
    interval). `c_phys` maps the state to the physical output pair
    [I_rec, V_out] and feeds every transfer-function computation. The two
    are kept as printed on the schematic derivation and are not reconciled;
    they differ in the sign convention of the first column.
    """

    params: DabParams
    schedule: Schedule
    c_intervals: tuple[np.ndarray, ...]
    c_phys: np.ndarray


def build_dab(params: DabParams, t3_skew: float = 0.0) -> DabSchedule:
    """Assemble the four-interval schedule for one switching period.

    Durations follow T1 = T3 = D_phase*T_half, T2 = T4 = (1-D_phase)*T_half.
    `t3_skew` (seconds, verification use only) is added to T3 and removed
    from T4, deliberately breaking the half-wave timing symmetry while
    keeping the period intact; the symmetry checks must then fail.
    """
    n, L, Co = params.n_turns, params.L, params.Co
    rt, rc, ro = params.Rt, params.Rc, params.Ro
    rc_ro = rc * ro / (ro + rc)  # ESR parallel load

    a_fwd = np.array([
        [-(n * n * rt + rc_ro) / (n * n * L), ro / (n * L * (ro + rc))],
        [-ro / (n * Co * (ro + rc)), -1.0 / (Co * (ro + rc))],
    ])
    # Reversed-coupling intervals: both off-diagonal terms change sign.
    a_rev = a_fwd * np.array([[1.0, -1.0], [-1.0, 1.0]])
    b_fwd = np.array([[1.0 / L], [0.0]])
    b_rev = -b_fwd

    t_half = params.t_half
    t1 = params.D_phase * t_half
    t2 = t_half - t1
    t3 = t1 + t3_skew
    t4 = t_half - t3
    if t3 < 0.0 or t4 < 0.0:
        raise ParameterError(f"t3_skew {t3_skew!r} pushes a duration negative")

    segments = (
        Segment(a_fwd, b_fwd, t1),
        Segment(a_rev, b_fwd, t2),
        Segment(a_rev, b_rev, t3),
        Segment(a_fwd, b_rev, t4),
    )
    schedule = Schedule(segments=segments, u=np.array([params.Vin]))

    # Structural identities, asserted numerically rather than assumed.
    segs = schedule.segments
    assert relative_residual(segs[3].a, segs[0].a) <= 1e-15
    assert relative_residual(segs[1].a, FLIP_VOLTAGE @ segs[0].a @ FLIP_VOLTAGE) <= 1e-15
    assert relative_residual(segs[2].a, segs[1].a) <= 1e-15
    assert relative_residual(segs[1].b, segs[0].b) <= 1e-15
    assert relative_residual(segs[2].b, -segs[0].b) <= 1e-15
    assert relative_residual(segs[3].b, -segs[0].b) <= 1e-15
    if t3_skew == 0.0:
        assert math.isclose(segs[0].duration, segs[2].duration, rel_tol=1e-15, abs_tol=0.0)
        assert math.isclose(segs[1].duration, segs[3].duration, rel_tol=1e-15, abs_tol=0.0)

    c_fwd = np.array([
        [-1.0 / n, 0.0],
        [-rc_ro / n, ro / (rc + ro)],
    ])
    c_rev = np.array([
        [1.0 / n, 0.0],
        [rc_ro / n, ro / (rc + ro)],
    ])
    c_phys = np.array([
        [1.0 / n, 0.0],
        [rc_ro / n, ro / (rc + ro)],
    ])
    return DabSchedule(
        params=params,
        schedule=schedule,
        c_intervals=(
            pwlti._frozen_array(c_fwd),
            pwlti._frozen_array(c_rev),
            pwlti._frozen_array(c_rev),
            pwlti._frozen_array(c_fwd),
        ),
        c_phys=pwlti._frozen_array(c_phys),
    )


def verify_symmetry(dab: DabSchedule, rtol: float = 1e-12) -> list[IdentityCheck]:
    """Residuals of the half-wave conjugation identities between the two half cycles.

    With S = FLIP_VOLTAGE and Dr = RECTIFY the second-half maps must satisfy

        phi3 = S phi1 S,   phi4 = S phi2 S,
        gamma3 = -S gamma1, gamma4 = -S gamma2,
        phi3 = Dr phi1 Dr,  phi4 = Dr phi2 Dr.

    These hold only because intervals pair up in state matrix, input sign,
    and duration; skewing T3 away from T1 must break them.
    """
    m1, m2, m3, m4 = segment_maps(dab.schedule)
    s = FLIP_VOLTAGE
    dr = RECTIFY
    return [
        IdentityCheck("symmetry/phi3-flip-voltage", relative_residual(m3.phi, s @ m1.phi @ s), rtol),
        IdentityCheck("symmetry/phi4-flip-voltage", relative_residual(m4.phi, s @ m2.phi @ s), rtol),
        IdentityCheck("symmetry/gamma3-negated", relative_residual(m3.gamma, -(s @ m1.gamma)), rtol),
        IdentityCheck("symmetry/gamma4-negated", relative_residual(m4.gamma, -(s @ m2.gamma)), rtol),
        IdentityCheck("symmetry/phi3-rectify", relative_residual(m3.phi, dr @ m1.phi @ dr), rtol),
        IdentityCheck("symmetry/phi4-rectify", relative_residual(m4.phi, dr @ m2.phi @ dr), rtol),
    ]


def solve_half_cycle(dab: DabSchedule, cond_limit: float = pwlti.COND_LIMIT) -> np.ndarray:
    """Period-start steady state from the first half cycle alone.

    Half-wave symmetry reduces the periodic condition x4 = x0 to

        (FLIP_CURRENT - phi2 phi1) x0 = phi2 gamma1 + gamma2,

    a 2x2 solve over half the maps the full-period route needs.
    """
    m1, m2, _, _ = segment_maps(dab.schedule)
    lhs = FLIP_CURRENT - m2.phi @ m1.phi
    rhs = m2.phi @ m1.gamma + m2.gamma
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > cond_limit:
        raise MarginalSystemError(
            f"half-cycle solve is marginal: cond ~ {cond:.3e} exceeds {cond_limit:.1e}",
            eigenvalues=np.linalg.eigvals(m2.phi @ m1.phi))
    return np.linalg.solve(lhs, rhs)


def interval_output(dab: DabSchedule, x: np.ndarray, interval: int) -> np.ndarray:
    """Output pair of one subinterval, y = C_interval x (interval is 1-based)."""
    if interval not in (1, 2, 3, 4):
        raise IndexError(f"interval must be 1..4, got {interval!r}")
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise DimensionError(f"state must have shape (2,), got {x.shape}")
    return dab.c_intervals[interval - 1] @ x


def physical_output(dab: DabSchedule, x: np.ndarray) -> np.ndarray:
    """Physical output pair [I_rec, V_out] = c_phys x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise DimensionError(f"state must have shape (2,), got {x.shape}")
    return dab.c_phys @ x
