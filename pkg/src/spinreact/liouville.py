"""Liouville-space conventions for the minimal {S, T} radical-pair basis.

Density matrices are vectorised row-major, so element ``(i, j)`` of an
``n x n`` matrix lands at index ``n*i + j``.  With that stacking the
superoperator of ``A rho B`` is ``kron(A, B.T)``, and the commutator /
anticommutator superoperators take the form ``A (x) E -/+ E (x) A^T``.

For the 2 x 2 spin problem the Liouville ordering is therefore
``(|S><S|, |S><T|, |T><S|, |T><T|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

S, T = 0, 1
LABELS = ("S", "T")
ELEMENTS = ("SS", "ST", "TS", "TT")

E = np.eye(2, dtype=complex)
Q_S = np.array([[1, 0], [0, 0]], dtype=complex)
Q_T = np.array([[0, 0], [0, 1]], dtype=complex)

ALGEBRA_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_TOL = -1e-10


def liouville_index(i: int, j: int, n: int = 2) -> int:
    """Position of density-matrix element ``(i, j)`` in the vectorised state."""
    return n * i + j


def vectorize(rho: ArrayLike) -> NDArray[np.complex128]:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
        raise ValueError(f"expected a square matrix of dimension >= 2, got shape {rho.shape}")
    return rho.reshape(-1).copy()


def devectorize(vec: ArrayLike) -> NDArray[np.complex128]:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    n = int(round(np.sqrt(vec.size)))
    if n * n != vec.size:
        raise ValueError(f"vector of length {vec.size} is not a vectorised square matrix")
    return vec.reshape(n, n).copy()


def _square(A: ArrayLike) -> NDArray[np.complex128]:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"operator must be square, got shape {A.shape}")
    return A


def left_superop(A: ArrayLike) -> NDArray[np.complex128]:
    """Superoperator of ``rho -> A rho``."""
    A = _square(A)
    return np.kron(A, np.eye(A.shape[0]))


def right_superop(B: ArrayLike) -> NDArray[np.complex128]:
    """Superoperator of ``rho -> rho B``."""
    B = _square(B)
    return np.kron(np.eye(B.shape[0]), B.T)


def sandwich_superop(A: ArrayLike, B: ArrayLike) -> NDArray[np.complex128]:
    """Superoperator of ``rho -> A rho B``."""
    A, B = _square(A), _square(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return np.kron(A, B.T)


def anticommutator_superop(A: ArrayLike) -> NDArray[np.complex128]:
    """``A (x) E + E (x) A^T``, i.e. the map ``rho -> A rho + rho A``."""
    return left_superop(A) + right_superop(A)


def commutator_superop(A: ArrayLike) -> NDArray[np.complex128]:
    """``A (x) E - E (x) A^T``, i.e. the map ``rho -> A rho - rho A``."""
    return left_superop(A) - right_superop(A)


def apply_superop(op: ArrayLike, rho: ArrayLike) -> NDArray[np.complex128]:
    op = np.asarray(op, dtype=complex)
    v = vectorize(rho)
    if op.shape != (v.size, v.size):
        raise ValueError(f"superoperator shape {op.shape} does not act on a {rho.shape} matrix")
    return devectorize(op @ v)


def is_hermitian(rho: ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    rho = np.asarray(rho, dtype=complex)
    return bool(np.max(np.abs(rho - rho.conj().T), initial=0.0) <= tol)


def is_positive_semidefinite(rho: ArrayLike, tol: float = PSD_TOL) -> bool:
    rho = np.asarray(rho, dtype=complex)
    herm = 0.5 * (rho + rho.conj().T)
    return bool(np.linalg.eigvalsh(herm).min() >= tol)


def check_density_matrix(rho: ArrayLike, *, unit_trace: bool = False, tol: float = 1e-10) -> None:
    """Raise ``ValueError`` if ``rho`` is not a valid (possibly sub-normalised) density matrix.

    Validation is on demand only; unnormalised reactant matrices are legal
    intermediate values and nothing here rescales them.
    """
    rho = _square(rho)
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    if not is_positive_semidefinite(rho):
        raise ValueError("density matrix has negative eigenvalues")
    tr = np.trace(rho).real
    if unit_trace and abs(tr - 1.0) > tol:
        raise ValueError(f"trace is {tr}, expected 1")
    if tr > 1.0 + tol:
        raise ValueError(f"trace {tr} exceeds 1")


@dataclass(frozen=True)
class PureSpinState:
    """Amplitudes of ``c_S |S> + c_T |T>``."""

    c_S: complex
    c_T: complex

    def __post_init__(self):
        norm = abs(self.c_S) ** 2 + abs(self.c_T) ** 2
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"|c_S|^2 + |c_T|^2 = {norm}, expected 1")

    @classmethod
    def superposition(cls) -> "PureSpinState":
        """The equal superposition (|S> + |T>)/sqrt(2)."""
        return cls(2**-0.5, 2**-0.5)

    @property
    def ket(self) -> NDArray[np.complex128]:
        return np.array([self.c_S, self.c_T], dtype=complex)

    def density(self) -> NDArray[np.complex128]:
        psi = self.ket
        return np.outer(psi, psi.conj())


def effective_purity(rho: ArrayLike) -> float:
    """Purity of the trace-renormalised matrix, ``Tr(rho^2) / Tr(rho)^2``."""
    rho = _square(rho)
    scale = np.abs(rho).max()
    if not scale > 0.0:
        raise ValueError("effective purity undefined for a zero-trace (fully reacted) state")
    # ratio is scale-free; parts divided separately since complex / subnormal overflows
    r = rho.real / scale + 1j * (rho.imag / scale)
    tr = np.trace(r).real
    if not tr > 0.0:
        raise ValueError("effective purity undefined for a zero-trace (fully reacted) state")
    return float(np.trace(r @ r).real / tr**2)


def projective_collapse(
    rho: ArrayLike, projectors: Sequence[ArrayLike] = (Q_S, Q_T), tol: float = ALGEBRA_TOL
) -> NDArray[np.complex128]:
    """Non-selective von Neumann measurement, ``sum_m Q_m rho Q_m``."""
    rho = _square(rho)
    qs = [_square(q) for q in projectors]
    if not qs:
        raise ValueError("empty projector set")
    n = rho.shape[0]
    if any(q.shape != (n, n) for q in qs):
        raise ValueError("projector dimension does not match the density matrix")
    if np.max(np.abs(sum(qs) - np.eye(n))) > tol:
        raise ValueError("projectors do not sum to the identity")
    if not all(is_hermitian(q, tol) for q in qs):
        raise ValueError("projectors must be Hermitian (orthogonal projectors)")
    for a, qa in enumerate(qs):
        for b, qb in enumerate(qs):
            target = qa if a == b else np.zeros_like(qa)
            if np.max(np.abs(qa @ qb - target)) > tol:
                raise ValueError("projectors are not idempotent and mutually orthogonal")
    return sum(q @ rho @ q for q in qs)


def trace_out_sites(blocks: ArrayLike) -> NDArray[np.complex128]:
    """Sum per-conformation spin density matrices into the reduced spin matrix.

    ``blocks`` is a sequence (or ``(N, n, n)`` array) of per-site matrices.
    """
    arr = np.asarray(blocks, dtype=complex)
    if arr.ndim != 3 or arr.shape[0] == 0:
        raise ValueError("need a non-empty stack of per-site density matrices")
    if arr.shape[1] != arr.shape[2]:
        raise ValueError("site blocks must be square")
    return arr.sum(axis=0)


def site_blocks(vec: ArrayLike, n: int = 2) -> NDArray[np.complex128]:
    """Split a site-major multi-site Liouville vector into ``(N, n, n)`` blocks."""
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.size % (n * n):
        raise ValueError(f"length {vec.size} is not a multiple of {n * n}")
    return vec.reshape(-1, n, n).copy()


def multi_site_vector(rho: ArrayLike, distribution: Sequence[float]) -> NDArray[np.complex128]:
    """Site-major vector with ``p_i * rho`` in conformation ``i``."""
    rho = _square(rho)
    p = np.asarray(distribution, dtype=float)
    return np.concatenate([pi * vectorize(rho) for pi in p])
