"""Entropic quantum-memory criterion on state trajectories.

The witness compares two snapshots of a reduced dynamics probed with an
untouched ancilla: if the system entropy at the earlier time is strictly
smaller than the larger negative conditional entropy at the later time,

    S_S(t1) < max(-S(S|A)(t2), -S(A|S)(t2)),

no classical-memory realization of the pair of maps exists. The scalar

    delta_s = S_S(t1) - max(-S(S|A)(t2), -S(A|S)(t2))

is therefore a certificate: delta_s < 0 proves quantum memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import gaussian as _gaussian
from .errors import ExtremumNotFoundError, InvalidSubsystemError, QmemError
from .lindblad import LindbladModel, evolve_choi
from .states import DEFAULT_CONVENTION, DensityMatrix, EntropyTriple, entropy_triple

#: delta_s must undershoot zero by more than this before detection is
#: declared, so rounding noise never produces a false positive.
DETECTION_THRESHOLD = -1e-9

_EXTREMUM_NOISE_FLOOR = 1e-10


@dataclass(frozen=True)
class WitnessReport:
    """Result of one witness evaluation.

    `neg_cond_sa_t2` is -S(S|A) and `neg_cond_as_t2` is -S(A|S), both at
    the later snapshot; `delta_s` combines them with `s_sys_t1` as in the
    module docstring. Times are optional (None when the snapshots do not
    come from a trajectory).
    """

    s_sys_t1: float
    neg_cond_sa_t2: float
    neg_cond_as_t2: float
    delta_s: float
    quantum_memory_detected: bool
    t1: float | None = None
    t2: float | None = None

    def __post_init__(self):
        expected = self.s_sys_t1 - max(self.neg_cond_sa_t2, self.neg_cond_as_t2)
        if abs(self.delta_s - expected) > 1e-12:
            raise ValueError("delta_s inconsistent with its parts")
        if self.quantum_memory_detected != (self.delta_s < DETECTION_THRESHOLD):
            raise ValueError("detection flag inconsistent with delta_s")
        if self.t1 is not None and self.t2 is not None and not self.t1 < self.t2:
            raise ValueError(f"t1={self.t1} must precede t2={self.t2}")

    def to_dict(self) -> dict:
        return {
            "t1": self.t1,
            "t2": self.t2,
            "s_sys_t1": self.s_sys_t1,
            "neg_cond_sa_t2": self.neg_cond_sa_t2,
            "neg_cond_as_t2": self.neg_cond_as_t2,
            "delta_s": self.delta_s,
            "quantum_memory_detected": self.quantum_memory_detected,
        }


def _report(s_sys_t1, neg_sa, neg_as, t1, t2) -> WitnessReport:
    delta_s = s_sys_t1 - max(neg_sa, neg_as)
    return WitnessReport(
        s_sys_t1=s_sys_t1,
        neg_cond_sa_t2=neg_sa,
        neg_cond_as_t2=neg_as,
        delta_s=delta_s,
        quantum_memory_detected=delta_s < DETECTION_THRESHOLD,
        t1=t1,
        t2=t2,
    )


def evaluate_criterion(
    rho_t1: DensityMatrix,
    rho_t2: DensityMatrix,
    t1: float | None = None,
    t2: float | None = None,
) -> WitnessReport:
    """Evaluate the witness on two bipartite snapshots with equal dims."""
    if len(rho_t1.dims) != 2 or rho_t1.dims != rho_t2.dims:
        raise InvalidSubsystemError(
            f"snapshots must share bipartite dims, got {rho_t1.dims} and {rho_t2.dims}"
        )
    trip1 = entropy_triple(rho_t1)
    trip2 = entropy_triple(rho_t2)
    return _report(trip1.s_system, trip2.neg_cond_sa, trip2.neg_cond_as, t1, t2)


def evaluate_criterion_gaussian(
    state_t1: _gaussian.TwoModeBlocks,
    state_t2: _gaussian.TwoModeBlocks,
    t1: float | None = None,
    t2: float | None = None,
) -> WitnessReport:
    """Witness on two-mode Gaussian snapshots, via symplectic entropies."""
    s_sys = _gaussian.entropy_single_mode(state_t1.alpha)
    s_joint = _gaussian.entropy_two_mode(state_t2)
    neg_sa = _gaussian.entropy_single_mode(state_t2.beta) - s_joint
    neg_as = _gaussian.entropy_single_mode(state_t2.alpha) - s_joint
    return _report(s_sys, neg_sa, neg_as, t1, t2)


def _interior_extrema(values: np.ndarray, kind: str, noise_floor: float) -> list[int]:
    """Indices of interior local minima/maxima with prominence above noise."""
    sign = 1.0 if kind == "min" else -1.0
    v = sign * values
    out = []
    for i in range(1, len(v) - 1):
        if v[i] <= v[i - 1] and v[i] <= v[i + 1]:
            if max(v[i - 1], v[i + 1]) - v[i] > noise_floor:
                out.append(i)
    return out


def _golden_refine(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Location of the minimum of f on [a, b] to within tol."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def find_witness_times(
    traj: Sequence[tuple[float, EntropyTriple]],
    evaluate: Callable[[float], EntropyTriple] | None = None,
    noise_floor: float = _EXTREMUM_NOISE_FLOOR,
    time_tolerance: float | None = None,
) -> tuple[float, float]:
    """Select the witness times on an entropy trajectory.

    t1 is the first interior local minimum of s_system, t2 the first
    local maximum of -S(S|A) after t1. When `evaluate` is given (a map
    from time to EntropyTriple, typically backed by the dense solution),
    both times are refined by golden-section search on re-evaluated
    states down to `time_tolerance` (default 1e-4 of the grid span);
    otherwise a parabolic fit through the three bracketing grid points
    is used.

    Raises ExtremumNotFoundError when either extremum is missing, e.g.
    on monotone trajectories (callers may extend the grid).
    """
    times = np.array([p[0] for p in traj], dtype=float)
    if times.size < 3:
        raise ExtremumNotFoundError("trajectory too short to contain extrema")
    s_sys = np.array([p[1].s_system for p in traj])
    neg_sa = np.array([p[1].neg_cond_sa for p in traj])
    span = times[-1] - times[0]
    tol = time_tolerance if time_tolerance is not None else 1e-4 * span

    i_mins = _interior_extrema(s_sys, "min", noise_floor)
    if not i_mins:
        raise ExtremumNotFoundError("no interior local minimum of s_system")
    i1 = i_mins[0]
    t1 = _refine_extremum(times, s_sys, i1, "min", evaluate, tol)

    i_maxs = [i for i in _interior_extrema(neg_sa, "max", noise_floor) if times[i] > t1]
    if not i_maxs:
        raise ExtremumNotFoundError("no local maximum of -S(S|A) after t1")
    i2 = i_maxs[0]
    t2 = _refine_extremum(times, neg_sa, i2, "max", evaluate, tol)
    if not t2 > t1:
        # adjacent extrema refined across each other; keep the grid value
        t2 = float(times[i2])
    return float(t1), float(t2)


def _refine_extremum(times, values, i, kind, evaluate, tol):
    a, b = times[i - 1], times[i + 1]
    if evaluate is not None:
        if kind == "min":
            f = lambda t: evaluate(t).s_system
        else:
            f = lambda t: -evaluate(t).neg_cond_sa
        return _golden_refine(f, a, b, tol)
    # parabola through the three grid points
    y0, y1, y2 = values[i - 1], values[i], values[i + 1]
    t0, t1_, t2_ = times[i - 1], times[i], times[i + 1]
    denom = (y0 - y1) * (t1_ - t2_) - (y1 - y2) * (t0 - t1_)
    if abs(denom) < 1e-300:
        return float(t1_)
    num = (y0 - y1) * (t1_ - t2_) * (t1_ + t2_) - (y1 - y2) * (t0 - t1_) * (t0 + t1_)
    vertex = 0.5 * num / denom
    if not (t0 < vertex < t2_):
        return float(t1_)
    return float(vertex)


def ordering_check(
    traj: Sequence[tuple[float, EntropyTriple]], tol: float = 1e-9
) -> bool:
    """True iff -S(S|A) >= -S(A|S) - tol at every grid time.

    Meaningful for trajectories started from a maximally entangled
    system-ancilla probe, where the ancilla marginal stays maximally
    mixed.
    """
    return all(p[1].neg_cond_sa >= p[1].neg_cond_as - tol for p in traj)


def qudit_entropy_trajectory(
    model: LindbladModel,
    t_max: float = 12.0,
    n_points: int = 2001,
) -> list[tuple[float, EntropyTriple]]:
    """Entropy triples of the extended qudit evolution on a uniform grid."""
    grid = np.linspace(0.0, float(t_max), int(n_points))
    ev = evolve_choi(model, grid)
    return [(float(t), entropy_triple(s)) for t, s in zip(ev.times, ev.states)]


@dataclass(frozen=True)
class QuditWitnessResult:
    """Full outcome of one qudit-model witness run."""

    report: WitnessReport
    triples: tuple[tuple[float, EntropyTriple], ...]
    revival_maxima: tuple[tuple[float, float], ...]
    ordering_ok: bool


def witness_qudit_model(
    model: LindbladModel,
    t_max: float = 12.0,
    n_points: int = 2001,
    time_tolerance: float | None = None,
) -> QuditWitnessResult:
    """Run the full pipeline for one qudit model.

    Extends a maximally entangled probe, integrates, selects (t1, t2),
    and evaluates the witness. The witness times are refined on the
    dense solution down to `time_tolerance` (default 1e-6 of t_max, so
    the reported delta_s is insensitive to the output grid).
    `revival_maxima` lists every interior local maximum of -S(S|A)
    after t1 as (time, value) pairs; entries beyond the first show
    whether later revivals could still detect.
    """
    grid = np.linspace(0.0, float(t_max), int(n_points))
    ev = evolve_choi(model, grid)
    triples = tuple(
        (float(t), entropy_triple(s)) for t, s in zip(ev.times, ev.states)
    )

    def evaluate(t: float) -> EntropyTriple:
        return entropy_triple(ev.state_at(t))

    tol = 1e-6 * float(t_max) if time_tolerance is None else time_tolerance
    t1, t2 = find_witness_times(triples, evaluate=evaluate, time_tolerance=tol)
    report = evaluate_criterion(ev.state_at(t1), ev.state_at(t2), t1=t1, t2=t2)
    neg_sa = np.array([p[1].neg_cond_sa for p in triples])
    revivals = tuple(
        (float(ev.times[i]), float(neg_sa[i]))
        for i in _interior_extrema(neg_sa, "max", _EXTREMUM_NOISE_FLOOR)
        if ev.times[i] > t1
    )
    return QuditWitnessResult(
        report=report,
        triples=triples,
        revival_maxima=revivals,
        ordering_ok=ordering_check(triples),
    )


@dataclass(frozen=True)
class QuditScanRow:
    """One cell of a (d, gamma/omega) scan; `error` is None on success."""

    d: int
    gamma_over_omega: float
    t1: float | None
    t2: float | None
    delta_s: float | None
    detected: bool | None
    ordering_ok: bool | None
    error: str | None


def scan_qudit(
    d_list: Sequence[int],
    gamma_over_omega_grid: Sequence[float],
    convention: str = DEFAULT_CONVENTION,
    t_max: float = 12.0,
    n_points: int = 2001,
    progress: Callable[[str], None] | None = None,
) -> list[QuditScanRow]:
    """Witness scan over dimensions and damping-to-coupling ratios.

    omega is fixed to 1 and gamma set to the ratio. Failing cells are
    recorded in their row and the scan continues; rows come out ordered
    by (d, ratio).
    """
    rows = []
    for d in d_list:
        for ratio in gamma_over_omega_grid:
            if progress is not None:
                progress(f"d={d} gamma/omega={ratio:g}")
            model = LindbladModel(d=d, omega=1.0, gamma=float(ratio), convention=convention)
            try:
                res = witness_qudit_model(model, t_max=t_max, n_points=n_points)
                rep = res.report
                rows.append(QuditScanRow(
                    d=int(d), gamma_over_omega=float(ratio),
                    t1=rep.t1, t2=rep.t2, delta_s=rep.delta_s,
                    detected=rep.quantum_memory_detected,
                    ordering_ok=res.ordering_ok, error=None,
                ))
            except QmemError as exc:
                rows.append(QuditScanRow(
                    d=int(d), gamma_over_omega=float(ratio),
                    t1=None, t2=None, delta_s=None, detected=None,
                    ordering_ok=None, error=str(exc),
                ))
    return rows


def find_critical_ratio(
    d: int,
    ratio_lo: float,
    ratio_hi: float,
    convention: str = DEFAULT_CONVENTION,
    t_max: float = 12.0,
    n_points: int = 2001,
    rel_tol: float = 0.02,
    collect: list | None = None,
) -> float:
    """Damping ratio at which the witness changes sign, by log-bisection.

    delta_s must be negative at ratio_lo and positive at ratio_hi.
    When `collect` is given, every evaluated QuditWitnessResult is
    appended to it (useful for auditing the trajectories afterwards).
    """

    def delta_at(ratio: float) -> float:
        model = LindbladModel(d=d, omega=1.0, gamma=ratio, convention=convention)
        res = witness_qudit_model(model, t_max=t_max, n_points=n_points)
        if collect is not None:
            collect.append(res)
        return res.report.delta_s

    lo, hi = float(ratio_lo), float(ratio_hi)
    f_lo, f_hi = delta_at(lo), delta_at(hi)
    if not (f_lo < 0.0 <= f_hi):
        raise ExtremumNotFoundError(
            f"no sign change on [{lo}, {hi}]: delta_s = {f_lo:.4g}, {f_hi:.4g}"
        )
    while hi / lo > 1.0 + rel_tol:
        mid = math.sqrt(lo * hi)
        if delta_at(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)
