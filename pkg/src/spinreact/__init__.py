"""Liouville-space reaction operators for spin-selective radical-pair reactions.

Builds Haberkorn and quantum-measurement reaction superoperators, multi-site
kinetic schemes with conformation-dependent tunnelling, and checks that the
multi-site schemes reduce to either single-site form in the appropriate
rate limits.
"""

__version__ = "0.1.0"

from .dynamics import (
    BiexponentialSolution,
    Trajectory,
    analytic_single_site,
    product_yields,
    propagate,
    rk4_reference,
    solve_block_2x2,
)
from .kernels import BACKEND
from .limits import (
    EffectiveOperatorReport,
    LimitCaseResult,
    crossover_scan,
    dephasing_ratio,
    effective_operator,
    fit_decay_rate,
    verify_limits,
)
from .liouville import (
    E,
    Q_S,
    Q_T,
    PureSpinState,
    anticommutator_superop,
    commutator_superop,
    devectorize,
    effective_purity,
    multi_site_vector,
    projective_collapse,
    trace_out_sites,
    vectorize,
)
from .operators import (
    ChannelRates,
    hamiltonian_superop,
    haberkorn_superop,
    liouvillian,
    measurement_rhs,
    measurement_superop,
    mixing_hamiltonian,
)
from .schemes import (
    EpsilonBlock,
    KineticScheme,
    SiteSpec,
    assemble_blocks,
    block_decompose,
    build_common_intermediate,
    build_generic,
    build_three_site,
    build_two_site,
)
