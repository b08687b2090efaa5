"""Exact discrete maps for piecewise-LTI systems with piecewise-constant input.

A switching converter that is linear and time invariant inside each
subinterval admits an exact discrete-time description: over a subinterval of
duration T_i with dynamics dx/dt = A_i x + B_i u, the boundary states obey

    x_i = Phi_i x_{i-1} + Gamma_i,
    Phi_i = exp(A_i T_i),
    Gamma_i = integral_0^{T_i} exp(A_i (T_i - tau)) B_i u dtau.

Chaining the subinterval maps across one switching period gives the state at
the period boundary in closed form, and the periodic steady state is the
fixed point of the one-period (monodromy) map. Everything in this module is
exact up to the matrix exponential; there is no time-stepping error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionError, MarginalSystemError, NumericInputError

# Condition-estimate ceiling shared by every fixed-point solve in the package.
COND_LIMIT = 1e12


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


def expm(a: np.ndarray, t: float) -> np.ndarray:
    """Matrix exponential exp(a*t).

    Parameters
    ----------
    a : np.ndarray
        Square matrix.
    t : float
        Scalar horizon, may be zero or negative.

    Returns
    -------
    np.ndarray
        exp(a*t), computed by scaling-and-squaring with a degree-13 Pade
        approximant and norm-based scaling (scipy.linalg.expm).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expm needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericInputError("expm input matrix has non-finite entries")
    if not math.isfinite(t):
        raise NumericInputError(f"expm horizon must be finite, got {t!r}")
    return scipy.linalg.expm(a * t)


@dataclass(frozen=True)
class Segment:
    """One subinterval of a switching period: dx/dt = a x + b u for `duration` seconds."""

    a: np.ndarray
    b: np.ndarray
    duration: float

    def __post_init__(self):
        a = _frozen_array(self.a)
        b = _frozen_array(self.b)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"segment state matrix must be square, got {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise DimensionError(
                f"segment input matrix {b.shape} does not match state dimension {a.shape[0]}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise NumericInputError("segment matrices must be finite")
        if not (math.isfinite(self.duration) and self.duration >= 0.0):
            raise NumericInputError(f"segment duration must be finite and >= 0, got {self.duration!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class Schedule:
    """An ordered tuple of segments driven by one constant input vector.

    The period defaults to the sum of segment durations; passing it
    explicitly is allowed only when it agrees with that sum to 1e-12
    relative (it exists as a field so the switching frequency stays an
    explicit, checkable quantity).
    """

    segments: tuple[Segment, ...]
    u: np.ndarray
    period: float | None = None

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise DimensionError("schedule needs at least one segment")
        u = _frozen_array(self.u)
        if u.ndim != 1:
            raise DimensionError(f"input vector must be 1-d, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise NumericInputError("input vector must be finite")
        dim = segments[0].dim
        m = segments[0].b.shape[1]
        for k, seg in enumerate(segments):
            if seg.dim != dim or seg.b.shape[1] != m:
                raise DimensionError(f"segment {k+1} shape disagrees with segment 1")
        if u.shape[0] != m:
            raise DimensionError(
                f"input vector length {u.shape[0]} does not match input matrix columns {m}")
        total = math.fsum(seg.duration for seg in segments)
        if self.period is None:
            object.__setattr__(self, "period", total)
        elif not math.isclose(self.period, total, rel_tol=1e-12, abs_tol=0.0):
            raise NumericInputError(
                f"period {self.period!r} does not equal the duration sum {total!r}")
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.segments[0].dim

    @property
    def n_segments(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class SegmentMap:
    """Exact one-segment discrete map x -> phi x + gamma."""

    phi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen_array(self.phi))
        object.__setattr__(self, "gamma", _frozen_array(self.gamma))


def segment_map(seg: Segment, u: np.ndarray) -> SegmentMap:
    """Exact discrete map of one segment under constant input.

    The forced response is obtained from the augmented exponential

        exp([[a, b u], [0, 0]] * T) = [[phi, gamma], [0, 1]],

    which needs no inverse of `a` and is exact for singular state matrices
    and for zero duration (phi = I, gamma = 0).
    """
    u = np.asarray(u, dtype=float)
    n = seg.dim
    if u.shape != (seg.b.shape[1],):
        raise DimensionError(
            f"input vector shape {u.shape} does not match input matrix columns {seg.b.shape[1]}")
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = seg.a
    aug[:n, n] = seg.b @ u
    m = expm(aug, seg.duration)
    return SegmentMap(phi=m[:n, :n], gamma=m[:n, n])


def forcing_via_inverse(seg: Segment, u: np.ndarray) -> np.ndarray:
    """Forced-response vector a^{-1} (phi - I) b u, valid for invertible `a`.

    Kept as an independent cross-check of the augmented-exponential route;
    only trustworthy while cond(a) stays moderate (callers gate on ~1e8).
    """
    phi = expm(seg.a, seg.duration)
    n = seg.dim
    return np.linalg.solve(seg.a, (phi - np.eye(n)) @ (seg.b @ np.asarray(u, dtype=float)))


def segment_maps(schedule: Schedule) -> tuple[SegmentMap, ...]:
    """Exact maps of every segment in schedule order."""
    return tuple(segment_map(seg, schedule.u) for seg in schedule.segments)


def reverse_product(matrices, first: int, last: int) -> np.ndarray:
    """Reverse-ordered product  M_last @ M_{last-1} @ ... @ M_first.

    Indices are one-based and inclusive, matching the subinterval numbering
    convention: `first == last` returns a copy of that single matrix. Empty
    or inverted ranges are errors rather than an implicit identity, because
    silent identity factors hide indexing bugs in period assembly.
    """
    n = len(matrices)
    if not (1 <= first <= last <= n):
        raise IndexError(f"reverse_product range [{first}, {last}] invalid for {n} matrices")
    out = np.array(matrices[first - 1], dtype=float)
    for j in range(first, last):
        out = matrices[j] @ out
    return out


def propagate(schedule: Schedule, x0: np.ndarray) -> list[np.ndarray]:
    """Boundary states [x_1, ..., x_n] from sequential application of the segment maps."""
    x = np.asarray(x0, dtype=float)
    if x.shape != (schedule.dim,):
        raise DimensionError(f"x0 shape {x.shape} does not match state dimension {schedule.dim}")
    states = []
    for m in segment_maps(schedule):
        x = m.phi @ x + m.gamma
        states.append(x)
    return states


def closed_form_state(schedule: Schedule, x0: np.ndarray) -> np.ndarray:
    """End-of-period state assembled from reverse products in one shot.

    x_n = (prod Phi) x0 + sum_{i=1}^{n-1} (Phi_n ... Phi_{i+1}) Gamma_i + Gamma_n.

    Algebraically identical to `propagate(...)[-1]`; kept as a distinct code
    path so the two can cross-check each other.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (schedule.dim,):
        raise DimensionError(f"x0 shape {x0.shape} does not match state dimension {schedule.dim}")
    maps = segment_maps(schedule)
    phis = [m.phi for m in maps]
    n = len(maps)
    out = reverse_product(phis, 1, n) @ x0
    for i in range(1, n):
        out = out + reverse_product(phis, i + 1, n) @ maps[i - 1].gamma
    return out + maps[-1].gamma


def periodic_forcing(maps) -> np.ndarray:
    """Accumulated forcing of one period: sum of tail products applied to each gamma."""
    phis = [m.phi for m in maps]
    n = len(maps)
    out = np.array(maps[-1].gamma, dtype=float)
    for i in range(1, n):
        out = out + reverse_product(phis, i + 1, n) @ maps[i - 1].gamma
    return out


def fixed_point_of_maps(maps, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Periodic fixed point x* of the composed maps: (I - Pi) x* = forcing.

    Raises MarginalSystemError, carrying the eigenvalues of the monodromy
    matrix Pi, when the condition estimate of (I - Pi) exceeds `cond_limit`;
    an eigenvalue of Pi on or near the unit circle makes the periodic
    solution meaningless at double precision.
    """
    phis = [m.phi for m in maps]
    pi = reverse_product(phis, 1, len(maps))
    lhs = np.eye(pi.shape[0]) - pi
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > cond_limit:
        raise MarginalSystemError(
            f"periodic solve is marginal: cond(I - Pi) ~ {cond:.3e} exceeds {cond_limit:.1e}",
            eigenvalues=np.linalg.eigvals(pi))
    return np.linalg.solve(lhs, periodic_forcing(maps))


def solve_periodic_fixed_point(schedule: Schedule, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Steady-state period-boundary state of a schedule."""
    return fixed_point_of_maps(segment_maps(schedule), cond_limit=cond_limit)


def monodromy(schedule: Schedule) -> np.ndarray:
    """One-period state transition matrix Pi = Phi_n ... Phi_1.

    Its eigenvalues decide stability of the periodic solution: all strictly
    inside the unit circle means the switching cycle is asymptotically stable.
    """
    maps = segment_maps(schedule)
    return reverse_product([m.phi for m in maps], 1, len(maps))


def relative_residual(actual: np.ndarray, expected: np.ndarray) -> float:
    """||actual - expected|| / (1 + ||expected||).

    The +1 in the denominator acts as an absolute floor so comparisons
    against near-zero references stay meaningful. Matrices use the
    Frobenius norm, vectors the 2-norm.
    """
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    return float(np.linalg.norm(actual - expected) / (1.0 + np.linalg.norm(expected)))


@dataclass(frozen=True)
class IdentityCheck:
    """One named residual check, as reported by the verification suites."""

    name: str
    residual: float
    tolerance: float
    note: str = field(default="")

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance
