"""Single-site reaction superoperators and the Hamiltonian superoperator.

Sign convention throughout: ``d rho/dt = -V rho`` with ``V = i H^- + K``,
where every kinetic part ``K`` has a non-negative spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .liouville import (
    E,
    HERMITIAN_TOL,
    Q_S,
    Q_T,
    anticommutator_superop,
    commutator_superop,
    sandwich_superop,
)


@dataclass(frozen=True)
class ChannelRates:
    """Singlet and triplet reaction rates (1/time) of one radical-pair form."""

    k_S: float = 0.0
    k_T: float = 0.0

    def __post_init__(self):
        for name in ("k_S", "k_T"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be a finite non-negative rate, got {value}")
            object.__setattr__(self, name, float(value))


def _rates(k_S, k_T) -> ChannelRates:
    if isinstance(k_S, ChannelRates):
        return k_S
    return ChannelRates(k_S, k_T)


def haberkorn_superop(k_S: float | ChannelRates, k_T: float = 0.0) -> NDArray[np.complex128]:
    """Conventional (Haberkorn) operator ``k_S/2 Q_S^+ + k_T/2 Q_T^+``.

    Diagonal in the Liouville basis: ``diag(k_S, (k_S+k_T)/2, (k_S+k_T)/2, k_T)``.
    Accepts either two rates or a :class:`ChannelRates`.
    """
    r = _rates(k_S, k_T)
    return 0.5 * r.k_S * anticommutator_superop(Q_S) + 0.5 * r.k_T * anticommutator_superop(Q_T)


def measurement_superop(k_S: float | ChannelRates, k_T: float = 0.0) -> NDArray[np.complex128]:
    """Quantum-measurement operator ``k_S (E(x)E - Q_T(x)Q_T) + k_T (E(x)E - Q_S(x)Q_S)``."""
    r = _rates(k_S, k_T)
    EE = sandwich_superop(E, E)
    return r.k_S * (EE - sandwich_superop(Q_T, Q_T)) + r.k_T * (EE - sandwich_superop(Q_S, Q_S))


def measurement_rhs(rho: ArrayLike, k_S: float | ChannelRates, k_T: float = 0.0) -> NDArray[np.complex128]:
    """Reaction part of ``d rho/dt`` in the measurement model, evaluated in Hilbert space."""
    r = _rates(k_S, k_T)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 density matrix, got {rho.shape}")
    return -(r.k_S + r.k_T) * rho + r.k_S * Q_T @ rho @ Q_T + r.k_T * Q_S @ rho @ Q_S


def haberkorn_rhs(rho: ArrayLike, k_S: float | ChannelRates, k_T: float = 0.0) -> NDArray[np.complex128]:
    r = _rates(k_S, k_T)
    rho = np.asarray(rho, dtype=complex)
    return -0.5 * r.k_S * (Q_S @ rho + rho @ Q_S) - 0.5 * r.k_T * (Q_T @ rho + rho @ Q_T)


def hamiltonian_superop(H: ArrayLike, tol: float = HERMITIAN_TOL) -> NDArray[np.complex128]:
    """``i [H, .]`` as a superoperator, the coherent part of ``V``."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got shape {H.shape}")
    if np.max(np.abs(H - H.conj().T)) > tol:
        raise ValueError("Hamiltonian is not Hermitian")
    return 1j * commutator_superop(H)


def mixing_hamiltonian(omega: float) -> NDArray[np.complex128]:
    """S-T0 mixing Hamiltonian with real off-diagonal ``omega/2`` (demo default)."""
    return np.array([[0.0, omega / 2], [omega / 2, 0.0]], dtype=complex)


def liouvillian(K: ArrayLike, H: ArrayLike | None = None) -> NDArray[np.complex128]:
    """Total ``V = i H^- + K``; ``H`` is applied identically in every conformation."""
    K = np.asarray(K, dtype=complex)
    if H is None:
        return K.copy()
    HS = hamiltonian_superop(H)
    if K.shape[0] % HS.shape[0]:
        raise ValueError(f"kinetic operator {K.shape} incompatible with Hamiltonian superoperator {HS.shape}")
    n_sites = K.shape[0] // HS.shape[0]
    return K + np.kron(np.eye(n_sites), HS)
