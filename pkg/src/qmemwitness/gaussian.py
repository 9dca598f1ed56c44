"""Continuous-variable machinery: covariance matrices, Gaussian channels,
entropies from symplectic invariants, the lossy-channel witness and the
damped-harmonic-oscillator model.

Units: hbar = 1, quadratures q = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2),
so the vacuum covariance matrix is I/2. States are zero-mean throughout
(a mean shift is a local unitary and leaves every entropy unchanged).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (
    AmplitudeVanishingError,
    DomainError,
    IntegrationFailureError,
    InvalidChannelError,
    NumericalDegeneracyError,
    UnphysicalStateError,
)

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
AMPLITUDE_CUTOFF = 1e-12

INTEGRATOR_RTOL = 1e-10
INTEGRATOR_ATOL = 1e-12

#: Single-mode symplectic form.
OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for `modes` modes, shape (2N, 2N)."""
    return np.kron(np.eye(modes), OMEGA_1)


def _check_physical(sigma: np.ndarray, what: str) -> None:
    modes = sigma.shape[0] // 2
    omega = symplectic_form(modes)
    lo = np.linalg.eigvalsh(sigma + 0.5j * omega).min()
    if lo < -PHYSICALITY_TOL:
        raise UnphysicalStateError(
            f"{what} violates sigma + i Omega/2 >= 0 (min eigenvalue {lo:.3e})"
        )


@dataclass(frozen=True)
class CovarianceState:
    """Zero-mean Gaussian state: real symmetric 2N x 2N covariance matrix."""

    sigma: np.ndarray
    modes: int

    def __post_init__(self):
        sig = np.array(self.sigma, dtype=float)
        n = int(self.modes)
        if sig.shape != (2 * n, 2 * n):
            raise UnphysicalStateError(
                f"covariance matrix shape {sig.shape} does not match {n} modes"
            )
        if np.abs(sig - sig.T).max() > SYMMETRY_TOL:
            raise UnphysicalStateError("covariance matrix is not symmetric")
        _check_physical(sig, "covariance matrix")
        sig.setflags(write=False)
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "modes", n)


@dataclass(frozen=True)
class GaussianChannel:
    """Single-mode Gaussian channel sigma -> M^T sigma M + N.

    Only shapes and the symmetry of N are enforced here; complete
    positivity is a separate predicate (`cp_check`) so that candidate
    channels violating it can still be constructed and rejected later.
    """

    m: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        n = np.array(self.n, dtype=float)
        if m.shape != (2, 2) or n.shape != (2, 2):
            raise InvalidChannelError("channel matrices must be 2x2")
        if np.abs(n - n.T).max() > SYMMETRY_TOL:
            raise InvalidChannelError("noise matrix N must be symmetric")
        m.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)


@dataclass(frozen=True)
class TwoModeBlocks:
    """Two-mode covariance matrix [[alpha, gamma], [gamma^T, beta]].

    alpha and beta are the reduced system/ancilla blocks, gamma_block the
    correlation block.
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma_block: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float)
        b = np.array(self.beta, dtype=float)
        g = np.array(self.gamma_block, dtype=float)
        for blk, name in ((a, "alpha"), (b, "beta"), (g, "gamma_block")):
            if blk.shape != (2, 2):
                raise UnphysicalStateError(f"{name} must be 2x2, got {blk.shape}")
        if np.abs(a - a.T).max() > SYMMETRY_TOL or np.abs(b - b.T).max() > SYMMETRY_TOL:
            raise UnphysicalStateError("alpha and beta must be symmetric")
        sig = np.block([[a, g], [g.T, b]])
        _check_physical(sig, "assembled two-mode state")
        for blk in (a, b, g):
            blk.setflags(write=False)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma_block", g)

    @property
    def sigma(self) -> np.ndarray:
        return np.block([[self.alpha, self.gamma_block],
                         [self.gamma_block.T, self.beta]])


@dataclass(frozen=True)
class DhoParams:
    """Damped-oscillator parameters: coupling strength g2 = |g|^2 (1/time^2),
    bath memory decay rate kappa (1/time), oscillator frequency omega and
    bath central frequency omega_big (1/time)."""

    g2: float
    kappa: float
    omega: float
    omega_big: float

    def __post_init__(self):
        if self.g2 < 0:
            raise DomainError(f"g2 must be >= 0, got {self.g2}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be > 0, got {self.kappa}")


def cp_check(ch: GaussianChannel, tol: float = PHYSICALITY_TOL) -> bool:
    """True iff N + (i/2) Omega - (i/2) M^T Omega M >= -tol."""
    cond = ch.n + 0.5j * OMEGA_1 - 0.5j * (ch.m.T @ OMEGA_1 @ ch.m)
    return bool(np.linalg.eigvalsh(cond).min() >= -tol)


def apply_channel(state: TwoModeBlocks, ch: GaussianChannel) -> TwoModeBlocks:
    """Act with the channel on the system mode, leaving the ancilla alone:

        alpha' = M^T alpha M + N,   gamma' = M^T gamma,   beta' = beta.
    """
    if not cp_check(ch):
        raise InvalidChannelError("channel violates complete positivity")
    return TwoModeBlocks(
        alpha=ch.m.T @ state.alpha @ ch.m + ch.n,
        beta=state.beta,
        gamma_block=ch.m.T @ state.gamma_block,
    )


def h(x):
    """Entropy (nats) of a single mode with symplectic eigenvalue x >= 1/2:

        h(x) = (x + 1/2) ln(x + 1/2) - (x - 1/2) ln(x - 1/2),

    continuously extended by h(1/2) = 0. Accepts scalars or arrays;
    values within 1e-9 below 1/2 are clamped to 1/2.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.5 - 1e-9):
        raise DomainError(f"h(x) requires x >= 1/2, got min {arr.min()}")
    arr = np.maximum(arr, 0.5)
    minus = arr - 0.5
    out = (arr + 0.5) * np.log(arr + 0.5)
    nz = minus > 0.0
    out = np.where(nz, out - minus * np.log(np.where(nz, minus, 1.0)), out)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def entropy_single_mode(alpha: np.ndarray) -> float:
    """h(sqrt(det alpha)) for a one-mode covariance block."""
    det = float(np.linalg.det(np.asarray(alpha, dtype=float)))
    if det < 0.25 - PHYSICALITY_TOL:
        raise UnphysicalStateError(f"det alpha = {det} below the vacuum bound 1/4")
    return h(math.sqrt(max(det, 0.25)))


def entropy_two_mode(state: TwoModeBlocks) -> float:
    """Entropy of a two-mode Gaussian state from its symplectic invariants.

    With Delta = det alpha + det beta + 2 det gamma the two symplectic
    eigenvalues are n_-/+ = sqrt((Delta -/+ sqrt(Delta^2 - 4 det sigma))/2)
    and the entropy is h(n_-) + h(n_+).
    """
    det_a = float(np.linalg.det(state.alpha))
    det_b = float(np.linalg.det(state.beta))
    det_g = float(np.linalg.det(state.gamma_block))
    det_s = float(np.linalg.det(state.sigma))
    delta = det_a + det_b + 2.0 * det_g
    disc = delta * delta - 4.0 * det_s
    if disc < -PHYSICALITY_TOL:
        raise NumericalDegeneracyError(f"negative discriminant {disc:.3e}")
    disc = max(disc, 0.0)
    root = math.sqrt(disc)
    n_minus = math.sqrt(max((delta - root) / 2.0, 0.0))
    n_plus = math.sqrt(max((delta + root) / 2.0, 0.0))
    # the square root amplifies ulp-level determinant roundoff near the
    # pure-state boundary; eigenvalues this close to 1/2 are noise (the
    # input state was already validated physical), so snap them exactly
    window = 1e-6 * max(1.0, abs(delta))
    if abs(n_minus - 0.5) <= window:
        n_minus = 0.5
    if abs(n_plus - 0.5) <= window:
        n_plus = 0.5
    return h(n_minus) + h(n_plus)


def two_mode_squeezed(r: float) -> TwoModeBlocks:
    """Pure two-mode squeezed state with squeezing parameter r > 0:

        alpha = beta = cosh(r) I / 2,   gamma = sinh(r) sigma_z / 2.
    """
    if not r > 0:
        raise DomainError(f"squeezing parameter must be > 0, got {r}")
    ch, sh = math.cosh(r), math.sinh(r)
    return TwoModeBlocks(
        alpha=0.5 * ch * np.eye(2),
        beta=0.5 * ch * np.eye(2),
        gamma_block=0.5 * sh * np.diag([1.0, -1.0]),
    )


def lossy_channel(eta: float) -> GaussianChannel:
    """Pure-loss channel mixing the mode with vacuum at loss eta in [0, 1]:

        M = sqrt(1 - eta) I,   N = eta I / 2.
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"loss parameter must lie in [0, 1], got {eta}")
    return GaussianChannel(m=math.sqrt(1.0 - eta) * np.eye(2), n=0.5 * eta * np.eye(2))


def delta_S_gaussian(state_t1: TwoModeBlocks, state_t2: TwoModeBlocks) -> float:
    """Entropic quantum-memory witness for two Gaussian snapshots:

        S[alpha_t1] + S[sigma_t2] - max(S[alpha_t2], S[beta_t2]).

    A strictly negative value certifies that no classical-memory
    realization connects the two snapshots.
    """
    return (
        entropy_single_mode(state_t1.alpha)
        + entropy_two_mode(state_t2)
        - max(entropy_single_mode(state_t2.alpha), entropy_single_mode(state_t2.beta))
    )


def delta_S_lossy(eta1, eta2, r):
    """Closed form of the witness for two lossy snapshots on a two-mode
    squeezed probe:

        h((eta1 + (1-eta1) cosh r)/2) + h((1-eta2 + eta2 cosh r)/2)
          - h(cosh(r)/2).

    Vectorizes over any of the arguments.
    """
    e1 = np.asarray(eta1, dtype=float)
    e2 = np.asarray(eta2, dtype=float)
    if np.any(e1 < 0) or np.any(e1 > 1) or np.any(e2 < 0) or np.any(e2 > 1):
        raise DomainError("loss parameters must lie in [0, 1]")
    rr = np.asarray(r, dtype=float)
    if np.any(rr <= 0):
        raise DomainError("squeezing parameter must be > 0")
    c = np.cosh(rr)
    out = h((e1 + (1.0 - e1) * c) / 2.0) + h((1.0 - e2 + e2 * c) / 2.0) - h(c / 2.0)
    if all(np.ndim(a) == 0 for a in (eta1, eta2, r)):
        return float(out)
    return out


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_delta_S_over_r(
    eta1: float,
    eta2: float,
    r_min: float = 1e-3,
    r_max: float = 6.0,
    coarse_points: int = 40,
) -> tuple[float, float]:
    """Minimize the lossy-channel witness over the squeezing parameter.

    Golden-section search on ln r, warm-started from a coarse grid.
    Returns (r_star, delta_S_star). The minimum is never positive-biased:
    values below the coarse grid's best are always explored around it.
    """
    if not 0.0 <= eta1 <= 1.0 or not 0.0 <= eta2 <= 1.0:
        raise DomainError("loss parameters must lie in [0, 1]")
    u_lo, u_hi = math.log(r_min), math.log(r_max)
    grid = np.linspace(u_lo, u_hi, coarse_points)
    vals = delta_S_lossy(eta1, eta2, np.exp(grid))
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, coarse_points - 1)]

    def f(u: float) -> float:
        return delta_S_lossy(eta1, eta2, math.exp(u))

    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > 1e-9:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    u_star = c if fc < fd else d
    f_star = min(fc, fd)
    best_grid = float(vals[k])
    if best_grid < f_star:
        u_star, f_star = float(grid[k]), best_grid
    return math.exp(u_star), float(f_star)


def dho_amplitude(
    params: DhoParams, t_grid: Sequence[float]
) -> list[tuple[float, complex, complex]]:
    """Oscillator amplitude c_t and its derivative on the output grid.

    Integrates the time-local equation

        c'' + (kappa + i omega + i omega_big) c'
            + [g2 + i omega (kappa + i omega_big)] c = 0

    with c(0) = 1, c'(0) = -i omega, which encodes an exponentially
    decaying bath memory kernel. Returns [(t, c, c_dot), ...].
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or abs(grid[0]) > 1e-14:
        raise DomainError("time grid must be 1-d and start at 0")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError("time grid must be strictly increasing")
    b = params.kappa + 1j * (params.omega + params.omega_big)
    c0 = params.g2 + 1j * params.omega * (params.kappa + 1j * params.omega_big)
    y0 = np.array([1.0, -1j * params.omega], dtype=complex)
    if grid.size == 1:
        return [(0.0, complex(y0[0]), complex(y0[1]))]

    def rhs(t, y):
        return np.array([y[1], -b * y[1] - c0 * y[0]])

    sol = solve_ivp(rhs, (0.0, float(grid[-1])), y0, t_eval=grid, method="DOP853",
                    rtol=INTEGRATOR_RTOL, atol=INTEGRATOR_ATOL)
    if not sol.success:
        raise IntegrationFailureError(sol.message)
    return [(float(t), complex(c), complex(cd))
            for t, c, cd in zip(grid, sol.y[0], sol.y[1])]


def dho_coefficients(
    c: complex, c_dot: complex, params: DhoParams
) -> tuple[complex, float, float]:
    """Master-equation coefficients at one instant of the amplitude flow:

        G = -(c_dot + i omega c) / c,
        gamma_t = 2 Re G,   omega_t = omega + Im G.

    Raises AmplitudeVanishingError when |c| is below the cutoff, since
    the coefficients diverge at amplitude zeros.
    """
    if abs(c) <= AMPLITUDE_CUTOFF:
        raise AmplitudeVanishingError(f"amplitude magnitude {abs(c):.3e} below cutoff")
    g = -(c_dot + 1j * params.omega * c) / c
    return g, 2.0 * g.real, params.omega + g.imag


def _rotation(phi: float) -> np.ndarray:
    cs, sn = math.cos(phi), math.sin(phi)
    return np.array([[cs, -sn], [sn, cs]])


def dho_channel(
    amplitude: Sequence[tuple[float, complex, complex]],
    params: DhoParams,
    t: float,
    on_vanishing: str = "raise",
) -> GaussianChannel:
    """Gaussian channel of the damped oscillator at grid time t:

        M_t = e^{-Gamma_t/2} R(Phi_t),   N_t = (1 - e^{-Gamma_t}) I / 2,

    with Gamma_t = -ln |c_t|^2 and the accumulated phase
    Phi_t = int_0^t omega_s ds evaluated by trapezoidal quadrature over
    the amplitude grid (the rotation never affects the witness).

    `amplitude` is the output of `dho_amplitude`; t must coincide with
    one of its grid times. With on_vanishing="full-loss" an amplitude
    zero at t yields the full-loss channel (M = 0, N = I/2) instead of
    raising.
    """
    times = np.array([p[0] for p in amplitude], dtype=float)
    cs = np.array([p[1] for p in amplitude], dtype=complex)
    cds = np.array([p[2] for p in amplitude], dtype=complex)
    span = max(times[-1], 1.0)
    k = int(np.argmin(np.abs(times - t)))
    if abs(times[k] - t) > 1e-9 * span:
        raise DomainError(f"t={t} is not a grid time of the amplitude trajectory")
    c_t = cs[k]
    if abs(c_t) <= AMPLITUDE_CUTOFF:
        if on_vanishing == "full-loss":
            return GaussianChannel(m=np.zeros((2, 2)), n=0.5 * np.eye(2))
        raise AmplitudeVanishingError(
            f"amplitude vanished at t={times[k]:.6g}", time=float(times[k])
        )
    gamma_big = -math.log(abs(c_t) ** 2)
    ok = np.abs(cs[: k + 1]) > AMPLITUDE_CUTOFF
    g_vals = -(cds[: k + 1][ok] + 1j * params.omega * cs[: k + 1][ok]) / cs[: k + 1][ok]
    omega_s = params.omega + np.interp(times[: k + 1], times[: k + 1][ok], g_vals.imag)
    phi = float(np.trapezoid(omega_s, times[: k + 1])) if k > 0 else 0.0
    scale = math.exp(-gamma_big / 2.0)
    return GaussianChannel(
        m=scale * _rotation(phi),
        n=0.5 * (1.0 - math.exp(-gamma_big)) * np.eye(2),
    )
