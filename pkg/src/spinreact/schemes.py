"""Multi-site kinetic superoperators for conformation-dependent tunnelling.

A radical pair can sit in several classical conformations (sites).  Each
site carries its own Haberkorn tunnelling operator and the sites interconvert
by first-order exchange.  States are ordered site-major: the four Liouville
elements of site 1, then those of site 2, and so on.

Exchange orientation: ``exchange[i, j]`` is the rate of flow out of site
``i`` into site ``j``.  Diagonal block ``i`` therefore carries
``+sum_j exchange[i, j]`` and off-diagonal block ``(i, j)`` carries
``-exchange[j, i]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .liouville import ELEMENTS
from .operators import ChannelRates, haberkorn_superop

EPSILON = {"SS": 1.0, "ST": 0.5, "TS": 0.5, "TT": 0.0}

_I4 = np.eye(4)


def _check_rates(**rates):
    for name, value in rates.items():
        if not np.isfinite(value) or value < 0:
            raise ValueError(f"{name} must be a finite non-negative rate, got {value}")


@dataclass(frozen=True)
class SiteSpec:
    label: str
    channel_rates: ChannelRates = field(default_factory=ChannelRates)


@dataclass(frozen=True)
class KineticScheme:
    """Sites, exchange-rate table and initial population of each site."""

    sites: tuple[SiteSpec, ...]
    exchange: NDArray[np.float64]
    initial_distribution: tuple[float, ...] | None = None

    def __post_init__(self):
        sites = tuple(self.sites)
        n = len(sites)
        if n < 1:
            raise ValueError("a kinetic scheme needs at least one site")
        ex = np.array(self.exchange, dtype=float).reshape(n, n) if n > 0 else None
        if not np.all(np.isfinite(ex)) or np.any(ex < 0):
            raise ValueError("exchange rates must be finite and non-negative")
        if np.any(np.diag(ex) != 0):
            raise ValueError("exchange table must have a zero diagonal")
        ex.setflags(write=False)
        if self.initial_distribution is None:
            dist = (1.0,) + (0.0,) * (n - 1)
        else:
            dist = tuple(float(p) for p in self.initial_distribution)
        if len(dist) != n or any(p < 0 for p in dist) or abs(sum(dist) - 1.0) > 1e-12:
            raise ValueError(f"initial distribution {dist} must have {n} non-negative entries summing to 1")
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "exchange", ex)
        object.__setattr__(self, "initial_distribution", dist)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def channels(self) -> list[ChannelRates]:
        return [s.channel_rates for s in self.sites]

    @classmethod
    def single(cls, k_S=0.0, k_T=0.0) -> "KineticScheme":
        return cls((SiteSpec("R", ChannelRates(k_S, k_T)),), np.zeros((1, 1)))

    @classmethod
    def two_site(cls, kS1, kS2, k12, k21, initial_distribution=None) -> "KineticScheme":
        sites = (SiteSpec("R1", ChannelRates(kS1)), SiteSpec("R2", ChannelRates(kS2)))
        return cls(sites, [[0.0, k12], [k21, 0.0]], initial_distribution)

    @classmethod
    def common_intermediate(cls, k12, k21, kS2, kT2, initial_distribution=None) -> "KineticScheme":
        sites = (SiteSpec("R1"), SiteSpec("R2", ChannelRates(kS2, kT2)))
        return cls(sites, [[0.0, k12], [k21, 0.0]], initial_distribution)

    @classmethod
    def three_site(cls, k12, k21, k13, k31, kS2, kT3, initial_distribution=None) -> "KineticScheme":
        sites = (SiteSpec("R1"), SiteSpec("R2", ChannelRates(kS2)), SiteSpec("R3", ChannelRates(0.0, kT3)))
        ex = [[0.0, k12, k13], [k21, 0.0, 0.0], [k31, 0.0, 0.0]]
        return cls(sites, ex, initial_distribution)


def build_two_site(kS1: float, kS2: float, k12: float, k21: float) -> NDArray[np.float64]:
    """8 x 8 operator for two conformations with singlet tunnelling only."""
    _check_rates(kS1=kS1, kS2=kS2, k12=k12, k21=k21)
    K1 = haberkorn_superop(kS1).real
    K2 = haberkorn_superop(kS2).real
    return np.block([[K1 + k12 * _I4, -k21 * _I4], [-k12 * _I4, K2 + k21 * _I4]])


def build_common_intermediate(k12: float, k21: float, kS2: float, kT2: float) -> NDArray[np.float64]:
    """8 x 8 operator: inert R1 exchanging with R2, which reacts by both channels."""
    _check_rates(k12=k12, k21=k21, kS2=kS2, kT2=kT2)
    K1 = haberkorn_superop(0.0).real
    K2 = haberkorn_superop(kS2, kT2).real
    return np.block([[K1 + k12 * _I4, -k21 * _I4], [-k12 * _I4, K2 + k21 * _I4]])


def build_three_site(k12: float, k21: float, k13: float, k31: float, kS2: float, kT3: float) -> NDArray[np.float64]:
    """12 x 12 operator: inert R1, singlet-reactive R2, triplet-reactive R3.

    R2 and R3 do not exchange directly.
    """
    _check_rates(k12=k12, k21=k21, k13=k13, k31=k31, kS2=kS2, kT3=kT3)
    K1 = haberkorn_superop(0.0).real
    K2 = haberkorn_superop(kS2).real
    K3 = haberkorn_superop(0.0, kT3).real
    Z = np.zeros((4, 4))
    return np.block(
        [
            [K1 + (0.0 + k12 + k13) * _I4, -k21 * _I4, -k31 * _I4],
            [-k12 * _I4, K2 + (k21 + 0.0 + 0.0) * _I4, Z],
            [-k13 * _I4, Z, K3 + (k31 + 0.0 + 0.0) * _I4],
        ]
    )


def build_generic(scheme: KineticScheme) -> NDArray[np.float64]:
    """4N x 4N operator for an arbitrary :class:`KineticScheme`."""
    if not isinstance(scheme, KineticScheme):
        raise TypeError("build_generic expects a KineticScheme")
    n = scheme.n_sites
    ex = scheme.exchange
    K = np.zeros((4 * n, 4 * n))
    for i, site in enumerate(scheme.sites):
        outflow = 0.0
        for j in range(n):
            outflow += ex[i, j]
        K[4 * i : 4 * i + 4, 4 * i : 4 * i + 4] = haberkorn_superop(site.channel_rates).real + outflow * _I4
        for j in range(n):
            if j != i:
                K[4 * i : 4 * i + 4, 4 * j : 4 * j + 4] = -ex[j, i] * _I4
    return K


@dataclass(frozen=True)
class EpsilonBlock:
    """Kinetics of one Liouville element across all sites.

    ``epsilon`` is the Haberkorn weight of the singlet channel on that
    element (1 for SS, 1/2 for ST and TS, 0 for TT).
    """

    element: str
    epsilon: float
    matrix: NDArray[np.float64]


def element_major_permutation(n_sites: int, n_elements: int = 4) -> NDArray[np.intp]:
    """Indices that reorder a site-major vector into element-major order."""
    return np.array([s * n_elements + e for e in range(n_elements) for s in range(n_sites)])


def block_decompose(op: ArrayLike, tol: float = 0.0) -> list[EpsilonBlock]:
    """Split a multi-site kinetic operator into its per-element N x N blocks.

    Raises ``ValueError`` when the operator couples different Liouville
    elements (for instance once a Hamiltonian has been added) or is complex.
    """
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] % 4:
        raise ValueError(f"expected a 4N x 4N operator, got shape {op.shape}")
    if np.iscomplexobj(op):
        if np.max(np.abs(op.imag), initial=0.0) > tol:
            raise ValueError("operator has imaginary parts; only kinetic (H = 0) operators decompose")
        op = op.real
    n = op.shape[0] // 4
    perm = element_major_permutation(n)
    P = op[np.ix_(perm, perm)]
    blocks = []
    mask = np.ones_like(P, dtype=bool)
    for e, name in enumerate(ELEMENTS):
        sl = slice(e * n, (e + 1) * n)
        mask[sl, sl] = False
        blocks.append(EpsilonBlock(name, EPSILON[name], P[sl, sl].copy()))
    if np.max(np.abs(P[mask]), initial=0.0) > tol:
        raise ValueError("operator couples different Liouville elements; not a kinetic scheme operator")
    return blocks


def assemble_blocks(blocks: Sequence[EpsilonBlock]) -> NDArray[np.float64]:
    """Inverse of :func:`block_decompose`."""
    if len(blocks) != 4:
        raise ValueError("need exactly four element blocks")
    n = blocks[0].matrix.shape[0]
    P = np.zeros((4 * n, 4 * n))
    for e, b in enumerate(blocks):
        P[e * n : (e + 1) * n, e * n : (e + 1) * n] = b.matrix
    perm = element_major_permutation(n)
    op = np.zeros_like(P)
    op[np.ix_(perm, perm)] = P
    return op
