"""Finite-dimensional state algebra: density matrices, partial traces, entropies.

All entropies are in nats (natural logarithm) throughout the package.

Tolerances follow a single policy: Hermiticity is required to 1e-10,
unit trace to 1e-9, and eigenvalues may undershoot zero by at most 1e-9
(eigensolver noise); anything worse is rejected as an invalid state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidStateError,
    InvalidSubsystemError,
)

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
EIGENVALUE_FLOOR = -1e-9
EIGENVALUE_CLIP = 1e-12

#: Ladder-operator conventions for a d-level system.
CONVENTION_SPIN = "spin"
CONVENTION_TRUNCATED = "truncated-oscillator"
CONVENTIONS = (CONVENTION_SPIN, CONVENTION_TRUNCATED)

#: Default convention. The spin ladder makes all exchange frequencies of the
#: qudit-memory model commensurate, which is what produces the strong
#: entanglement revivals the witness relies on for d > 2.
DEFAULT_CONVENTION = CONVENTION_SPIN


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density matrix with an explicit subsystem split.

    Attributes
    ----------
    data : complex ndarray, shape (n, n)
        Hermitian, positive semidefinite, unit trace (within tolerance).
    dims : tuple of int
        Ordered subsystem dimensions; their product equals n.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidStateError(f"expected a square matrix, got shape {arr.shape}")
        if any(d < 1 for d in dims) or math.prod(dims) != arr.shape[0]:
            raise InvalidSubsystemError(
                f"subsystem dimensions {dims} do not factor a {arr.shape[0]}-dim space"
            )
        herm = np.abs(arr - arr.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise InvalidStateError(f"not Hermitian: max |A - A^dag| = {herm:.3e}")
        tr = arr.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        lo = np.linalg.eigvalsh((arr + arr.conj().T) / 2).min()
        if lo < EIGENVALUE_FLOOR:
            raise InvalidStateError(f"negative eigenvalue {lo:.3e} below tolerance")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_vector(cls, psi: np.ndarray, dims: Sequence[int]) -> "DensityMatrix":
        """Density matrix of a pure state, normalizing the vector."""
        v = np.asarray(psi, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise InvalidStateError("zero vector")
        v = v / nrm
        return cls(np.outer(v, v.conj()), tuple(dims))


@dataclass(frozen=True)
class EntropyTriple:
    """Entropies (nats) of a bipartite state and its reduced states.

    `s_system` and `s_ancilla` refer to the first and second tensor factor.
    The conditional entropies follow as S(S|A) = s_joint - s_ancilla and
    S(A|S) = s_joint - s_system.
    """

    s_system: float
    s_ancilla: float
    s_joint: float

    def __post_init__(self):
        vals = (self.s_system, self.s_ancilla, self.s_joint)
        if min(vals) < -1e-9:
            raise InvalidStateError(f"negative entropy in {vals}")
        if abs(self.s_system - self.s_ancilla) > self.s_joint + 1e-8:
            raise InvalidStateError("triangle (Araki-Lieb) inequality violated")
        if self.s_joint > self.s_system + self.s_ancilla + 1e-8:
            raise InvalidStateError("subadditivity violated")

    @property
    def neg_cond_sa(self) -> float:
        """-S(S|A) = s_ancilla - s_joint; positive only for entangled states."""
        return self.s_ancilla - self.s_joint

    @property
    def neg_cond_as(self) -> float:
        """-S(A|S) = s_system - s_joint."""
        return self.s_system - self.s_joint


def max_entangled_state(d: int) -> DensityMatrix:
    """|Phi+><Phi+| with |Phi+> = sum_l |ll> / sqrt(d), dims (d, d)."""
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"d must be an integer >= 2, got {d}")
    d = int(d)
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1.0 / math.sqrt(d)
    return DensityMatrix(np.outer(psi, psi.conj()), (d, d))


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out all subsystems not listed in `keep`.

    Kept subsystems stay in their original order regardless of the order
    in which `keep` lists them.
    """
    keep_set = set(int(k) for k in keep)
    n_sub = len(rho.dims)
    if not keep_set:
        raise InvalidSubsystemError("keep must not be empty")
    if any(k < 0 or k >= n_sub for k in keep_set):
        raise InvalidSubsystemError(
            f"subsystem indices {sorted(keep_set)} invalid for dims {rho.dims}"
        )
    traced = [i for i in range(n_sub) if i not in keep_set]
    data = rho.data.reshape(rho.dims + rho.dims)
    remaining = n_sub
    for idx in sorted(traced, reverse=True):
        data = np.trace(data, axis1=idx, axis2=idx + remaining)
        remaining -= 1
    kept_dims = tuple(rho.dims[i] for i in sorted(keep_set))
    side = math.prod(kept_dims)
    return DensityMatrix(data.reshape(side, side), kept_dims)


def _entropy_from_eigenvalues(w: np.ndarray) -> float:
    if w.min() < EIGENVALUE_FLOOR:
        raise InvalidStateError(f"negative eigenvalue {w.min():.3e} below tolerance")
    w = w[w > EIGENVALUE_CLIP]
    return float(-(w * np.log(w)).sum())


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    """-sum_i lam_i ln(lam_i) in nats, with 0 ln 0 := 0.

    Eigenvalues in [-1e-9, 1e-12) are treated as exact zeros; anything
    more negative raises. The matrix is symmetrized before diagonalizing
    to absorb integrator drift.
    """
    arr = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    herm = np.abs(arr - arr.conj().T).max()
    if herm > HERMITICITY_TOL:
        raise InvalidStateError(f"not Hermitian: max |A - A^dag| = {herm:.3e}")
    w = np.linalg.eigvalsh((arr + arr.conj().T) / 2)
    return _entropy_from_eigenvalues(w)


def entropy_triple(rho_sa: DensityMatrix) -> EntropyTriple:
    """Joint and reduced entropies of a bipartite state."""
    if len(rho_sa.dims) != 2:
        raise InvalidSubsystemError(f"expected bipartite dims, got {rho_sa.dims}")
    dS, dA = rho_sa.dims
    block = rho_sa.data.reshape(dS, dA, dS, dA)
    rho_s = np.trace(block, axis1=1, axis2=3)
    rho_a = np.trace(block, axis1=0, axis2=2)
    return EntropyTriple(
        s_system=von_neumann_entropy(rho_s),
        s_ancilla=von_neumann_entropy(rho_a),
        s_joint=von_neumann_entropy(rho_sa),
    )


def ladder_operators(
    d: int, convention: str = DEFAULT_CONVENTION
) -> tuple[np.ndarray, np.ndarray]:
    """Raising/lowering pair (J_plus, J_minus) for a d-level system.

    convention:
      * "spin": matrix elements sqrt((n+1)(d-1-n)), the angular-momentum
        ladder for j = (d-1)/2 with basis index n = m + j.
      * "truncated-oscillator": matrix elements sqrt(n+1), the bosonic
        ladder cut off at level d-1.

    Both reduce to sigma_+/sigma_- for d = 2, with sigma_+ = |1><0|.
    """
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"d must be an integer >= 2, got {d}")
    if convention not in CONVENTIONS:
        raise InvalidDimensionError(
            f"unknown ladder convention {convention!r}; choose one of {CONVENTIONS}"
        )
    d = int(d)
    n = np.arange(d - 1, dtype=float)
    if convention == CONVENTION_SPIN:
        elems = np.sqrt((n + 1.0) * (d - 1.0 - n))
    else:
        elems = np.sqrt(n + 1.0)
    j_plus = np.zeros((d, d), dtype=complex)
    j_plus[np.arange(1, d), np.arange(d - 1)] = elems
    return j_plus, j_plus.conj().T
