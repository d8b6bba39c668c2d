"""Time propagation, closed-form single-site solutions and product yields.

``propagate`` evaluates ``rho(t) = expm(-V t) rho(0)`` directly at each
requested time (no stepping between samples).  Each exponential is taken of
the augmented matrix ``[[-V, v0], [0, 0]] * t`` so that the time integral of
the state comes out of the same call; those integrals give exact product
yields independent of the sample grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from . import kernels
from .liouville import (
    PureSpinState,
    effective_purity,
    multi_site_vector,
    site_blocks,
    trace_out_sites,
    vectorize,
)
from .operators import ChannelRates

DEGENERACY_TOL = 1e-12


@dataclass
class Trajectory:
    """Sampled evolution of a (possibly multi-site) radical-pair ensemble.

    ``states`` are the site-traced 2 x 2 spin density matrices.  Per-site
    singlet/triplet populations and their running time integrals are kept so
    that product yields can be recomputed for any channel assignment.
    """

    times: NDArray[np.float64]
    states: NDArray[np.complex128]
    purity: NDArray[np.float64]
    site_populations: NDArray[np.float64]
    site_integrals: NDArray[np.float64]
    channels: list[ChannelRates] | None = None
    product_singlet: NDArray[np.float64] | None = None
    product_triplet: NDArray[np.float64] | None = None
    site_states: NDArray[np.complex128] | None = field(default=None, repr=False)

    @property
    def n_sites(self) -> int:
        return self.site_populations.shape[1]

    @property
    def reactant_trace(self) -> NDArray[np.float64]:
        return np.trace(self.states, axis1=1, axis2=2).real

    def element(self, name: str) -> NDArray[np.complex128]:
        i, j = ("ST".index(name[0]), "ST".index(name[1]))
        return self.states[:, i, j]


def initial_vector(rho0, n_sites: int) -> NDArray[np.complex128]:
    arr = np.asarray(rho0, dtype=complex)
    if arr.ndim == 1:
        if arr.size != 4 * n_sites:
            raise ValueError(f"initial vector has length {arr.size}, expected {4 * n_sites}")
        return arr.copy()
    if arr.ndim == 2:
        if n_sites != 1:
            raise ValueError("a multi-site operator needs per-site initial blocks (see multi_site_vector)")
        return vectorize(arr)
    if arr.ndim == 3:
        if arr.shape != (n_sites, 2, 2):
            raise ValueError(f"initial blocks have shape {arr.shape}, expected {(n_sites, 2, 2)}")
        return arr.reshape(-1).copy()
    raise ValueError(f"cannot interpret initial state of shape {arr.shape}")


def _safe_purity(rho) -> float:
    try:
        return effective_purity(rho)
    except ValueError:
        return float("nan")


def propagate(
    V: ArrayLike,
    rho0: ArrayLike,
    times: Sequence[float],
    channels: Sequence[ChannelRates] | None = None,
    keep_sites: bool = False,
) -> Trajectory:
    """Evolve under ``d rho/dt = -V rho`` and sample at ``times``.

    Parameters
    ----------
    V : (4N, 4N) array
        Total superoperator (kinetic plus ``i H^-``), site-major ordering.
    rho0 : array
        A 2 x 2 matrix for single-site operators, an ``(N, 2, 2)`` stack of
        per-site blocks, or a site-major Liouville vector.
    times : increasing sequence
    channels : list of ChannelRates, optional
        Per-site reaction rates; enables ``product_singlet``/``product_triplet``.
    keep_sites : bool
        Also store the untraced per-site blocks.
    """
    V = np.asarray(V, dtype=complex)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 4:
        raise ValueError(f"expected a 4N x 4N superoperator, got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError("superoperator has non-finite entries")
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("times must be non-negative and strictly increasing")
    m = V.shape[0]
    n_sites = m // 4
    v0 = initial_vector(rho0, n_sites)

    aug = np.zeros((m + 1, m + 1), dtype=complex)
    aug[:m, :m] = -V
    aug[:m, m] = v0
    vecs = np.empty((times.size, m), dtype=complex)
    integrals = np.empty((times.size, m), dtype=complex)
    for k, t in enumerate(times):
        F = scipy.linalg.expm(aug * t)
        vecs[k] = F[:m, :m] @ v0
        integrals[k] = F[:m, m]

    blocks = vecs.reshape(times.size, n_sites, 2, 2)
    states = blocks.sum(axis=1)
    pops = np.stack([blocks[:, :, 0, 0].real, blocks[:, :, 1, 1].real], axis=-1)
    iblocks = integrals.reshape(times.size, n_sites, 2, 2)
    ints = np.stack([iblocks[:, :, 0, 0].real, iblocks[:, :, 1, 1].real], axis=-1)
    traj = Trajectory(
        times=times,
        states=states,
        purity=np.array([_safe_purity(s) for s in states]),
        site_populations=pops,
        site_integrals=ints,
        site_states=blocks if keep_sites else None,
    )
    if channels is not None:
        traj.channels = list(channels)
        traj.product_singlet, traj.product_triplet = product_yields(traj)
    return traj


def product_yields(
    trajectory: Trajectory, channels: Sequence[ChannelRates] | None = None, method: str = "exact"
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Accumulated singlet and triplet product populations at each sample.

    ``method="exact"`` uses the integrals carried by the trajectory;
    ``method="trapezoid"`` integrates the sampled per-site populations, assumes
    the grid starts at t = 0, and is only as good as the grid resolves the
    fastest transient.
    """
    channels = channels if channels is not None else trajectory.channels
    if channels is None:
        raise ValueError("product yields need per-site channel rates")
    if len(channels) != trajectory.n_sites:
        raise ValueError(f"{len(channels)} channel entries for {trajectory.n_sites} sites")
    kS = np.array([c.k_S for c in channels])
    kT = np.array([c.k_T for c in channels])
    if method == "exact":
        ints = trajectory.site_integrals
    elif method == "trapezoid":
        pops = trajectory.site_populations
        dt = np.diff(trajectory.times)[:, None, None]
        steps = 0.5 * (pops[1:] + pops[:-1]) * dt
        ints = np.concatenate([np.zeros_like(pops[:1]), np.cumsum(steps, axis=0)])
    else:
        raise ValueError(f"unknown quadrature method {method!r}")
    y_S = ints[:, :, 0] @ kS
    y_T = ints[:, :, 1] @ kT
    return y_S, y_T


def analytic_single_site(state0: PureSpinState, k_S: float, t: float) -> NDArray[np.complex128]:
    """Closed-form enlarged {P, S, T} density matrix for singlet-only Haberkorn decay."""
    if k_S < 0 or t < 0:
        raise ValueError("k_S and t must be non-negative")
    cS, cT = state0.c_S, state0.c_T
    full = np.exp(-k_S * t)
    half = np.exp(-0.5 * k_S * t)
    pS = (cS * np.conj(cS)).real
    return np.array(
        [
            [pS * (1.0 - full), 0.0, 0.0],
            [0.0, pS * full, cS * np.conj(cT) * half],
            [0.0, cT * np.conj(cS) * half, (cT * np.conj(cT)).real],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class BiexponentialSolution:
    """``p(t) = amp_fast e^{-rate_fast t} + amp_slow e^{-rate_slow t}``.

    When the two rates coincide (``degenerate``) the form is
    ``(amp_fast + amp_slow * t) e^{-rate_slow t}`` instead.  Rates and
    amplitudes are complex only for blocks with complex eigenvalues, which
    kinetic blocks never have.
    """

    rate_fast: complex
    rate_slow: complex
    amp_fast: NDArray
    amp_slow: NDArray
    degenerate: bool = False

    def __call__(self, times: ArrayLike) -> NDArray:
        t = np.asarray(times, dtype=float)[..., None]
        if self.degenerate:
            return (self.amp_fast + self.amp_slow * t) * np.exp(-self.rate_slow * t)
        return self.amp_fast * np.exp(-self.rate_fast * t) + self.amp_slow * np.exp(-self.rate_slow * t)


def solve_block_2x2(block, p0: ArrayLike, times: ArrayLike | None = None):
    """Analytic solution of ``dp/dt = -M p`` for a 2 x 2 block.

    ``block`` is an :class:`~spinreact.schemes.EpsilonBlock` or a bare
    matrix.  Returns the :class:`BiexponentialSolution`, or
    ``(solution, samples)`` when ``times`` is given.
    """
    M = np.asarray(getattr(block, "matrix", block))
    if M.shape != (2, 2):
        raise ValueError(f"expected a 2x2 block, got {M.shape}")
    p0 = np.asarray(p0)
    I = np.eye(2)
    tr = M[0, 0] + M[1, 1]
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    disc = tr * tr - 4.0 * det
    if abs(disc) <= DEGENERACY_TOL * abs(tr) ** 2:
        # (M - lam I)^2 = 0, so expm(-M t) = e^{-lam t} (I - t (M - lam I))
        lam = tr / 2.0
        sol = BiexponentialSolution(lam, lam, p0 + 0.0, -(M - lam * I) @ p0, degenerate=True)
    else:
        root = np.sqrt(disc) if disc > 0 else np.sqrt(complex(disc))
        # larger-magnitude root first, the other from det to avoid cancellation
        big = (tr + root) / 2.0 if np.real(tr) >= 0 else (tr - root) / 2.0
        small = det / big if big != 0 else (tr - root) / 2.0
        lam_f, lam_s = (big, small) if np.real(big) >= np.real(small) else (small, big)
        a_f = (M - lam_s * I) @ p0 / (lam_f - lam_s)
        a_s = (M - lam_f * I) @ p0 / (lam_s - lam_f)
        sol = BiexponentialSolution(lam_f, lam_s, a_f, a_s)
    if times is None:
        return sol
    return sol, sol(times)


def rk4_reference(V: ArrayLike, rho0: ArrayLike, times: Sequence[float], step_factor: float = 0.02,
                  max_step: float | None = None) -> NDArray[np.complex128]:
    """Fixed-step RK4 solution of ``d rho/dt = -V rho``: the independent check on :func:`propagate`.

    The step obeys ``h * spectral_radius(V) <= step_factor``.  Returns the
    site-major Liouville vectors at each time.
    """
    V = np.asarray(V, dtype=complex)
    v0 = initial_vector(rho0, V.shape[0] // 4)
    times = np.asarray(times, dtype=float)
    radius = np.max(np.abs(np.linalg.eigvals(V)), initial=0.0)
    h = step_factor / radius if radius > 0 else np.inf
    if max_step is not None:
        h = min(h, max_step)
    if not np.isfinite(h):
        h = max(times[-1] - times[0], 1.0)
    samples = np.concatenate([[0.0], times]) if times[0] > 0 else times
    out = kernels.rk4_integrate(V, v0, samples, float(h))
    return out[1:] if times[0] > 0 else out


def traced_states(vecs: ArrayLike) -> NDArray[np.complex128]:
    """Site-trace a stack of site-major vectors into 2 x 2 matrices."""
    vecs = np.asarray(vecs)
    return np.array([trace_out_sites(site_blocks(v)) for v in vecs])


__all__ = [
    "BiexponentialSolution",
    "Trajectory",
    "analytic_single_site",
    "multi_site_vector",
    "product_yields",
    "propagate",
    "rk4_reference",
    "solve_block_2x2",
    "traced_states",
]
