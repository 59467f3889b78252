"""Permutation-uniform Markov chains and Markovian exponential families.

Finite-state tooling: detect per-row relabelling structure in transition
matrices, move between chain and iid coordinates, validate conditional and
Markovian exponential families, factor graph statistics over dyads, and
evaluate dyadic multigraph models in closed form with brute-force oracles
to check against.
"""

from . import models, oracle, serialize
from .core import (
    Multigraph,
    PermutationFamily,
    Pmf,
    StateSpace,
    StochasticMatrix,
    build_generic_space,
    build_modular_space,
    build_multigraph_space,
    builtin_family,
    canonical_dyads,
    dyad_index,
    identity_family,
    invert_family,
    is_symmetric_family,
    num_dyads,
)
from .ermgm import (
    ErmgmModel,
    MleEstimate,
    UnionFamily,
    dyad_pmf,
    eta_density,
    fast_log_partition,
    fast_log_partition_instrumented,
    from_factorization,
    mle_density_stability,
    multigraph_log_pmf,
    sample_multigraph,
    sample_multigraphs,
    to_expfam,
    union_expfam,
    union_log_probability,
)
from .errors import (
    EnumerationCapError,
    NotAnMefError,
    PowerIterationError,
    PumcError,
    SpaceTooLargeError,
    TheoremViolationError,
)
from .expfam import (
    CefSpec,
    ExpFamilySpec,
    MefSpec,
    ParameterMap,
    affinely_independent_entries,
    as_mef,
    cef_transition_matrix,
    expfam_to_mef,
    gani_row_value_sets,
    grad_log_partition_fd,
    joint_log_pmf_from_counts,
    kappa_tau_puniformity,
    log_partition,
    mean_parameter,
    mean_statistic,
    mef_check,
    mef_joint_log_pmf,
    pmf,
    puniform_cef_to_expfam,
    transition_counts,
    validate_cef,
)
from .netstat import (
    DyadicFactorization,
    FactorResult,
    IsoClasses,
    exchangeability_transfer,
    factor_dyadditive,
    factor_dyadically_multiplicative,
    is_finitely_exchangeable,
    is_relation_invariant,
    iso_classes,
    multigraph_union,
    stat_density,
    stat_reciprocity,
    stat_stability,
    stat_transitivity,
)
from .puniform import (
    PuniformWitness,
    Trajectory,
    chain_to_iid,
    check_puniform,
    detect_puniform,
    detection_violation,
    iid_to_chain,
    induced_function,
    symmetry_transfer_check,
)
from .rng import stream, uniforms
from .simulate import (
    convergence_report,
    sample_chain,
    sample_puniform_chain,
    stability_transition_matrix,
    stationary_distribution,
    trace_and_limit_checks,
)

__version__ = "0.1.0"

__all__ = [
    "CefSpec",
    "DyadicFactorization",
    "EnumerationCapError",
    "ErmgmModel",
    "ExpFamilySpec",
    "FactorResult",
    "IsoClasses",
    "MefSpec",
    "MleEstimate",
    "Multigraph",
    "NotAnMefError",
    "ParameterMap",
    "PermutationFamily",
    "Pmf",
    "PowerIterationError",
    "PumcError",
    "PuniformWitness",
    "SpaceTooLargeError",
    "StateSpace",
    "StochasticMatrix",
    "TheoremViolationError",
    "Trajectory",
    "UnionFamily",
    "affinely_independent_entries",
    "as_mef",
    "build_generic_space",
    "build_modular_space",
    "build_multigraph_space",
    "builtin_family",
    "canonical_dyads",
    "cef_transition_matrix",
    "chain_to_iid",
    "check_puniform",
    "convergence_report",
    "detect_puniform",
    "detection_violation",
    "dyad_index",
    "dyad_pmf",
    "eta_density",
    "exchangeability_transfer",
    "expfam_to_mef",
    "factor_dyadditive",
    "factor_dyadically_multiplicative",
    "fast_log_partition",
    "fast_log_partition_instrumented",
    "from_factorization",
    "gani_row_value_sets",
    "grad_log_partition_fd",
    "identity_family",
    "iid_to_chain",
    "induced_function",
    "invert_family",
    "is_finitely_exchangeable",
    "is_relation_invariant",
    "is_symmetric_family",
    "iso_classes",
    "joint_log_pmf_from_counts",
    "kappa_tau_puniformity",
    "log_partition",
    "mean_parameter",
    "mean_statistic",
    "mef_check",
    "mef_joint_log_pmf",
    "mle_density_stability",
    "models",
    "multigraph_log_pmf",
    "multigraph_union",
    "num_dyads",
    "oracle",
    "pmf",
    "puniform_cef_to_expfam",
    "sample_chain",
    "sample_multigraph",
    "sample_multigraphs",
    "sample_puniform_chain",
    "serialize",
    "stability_transition_matrix",
    "stat_density",
    "stat_reciprocity",
    "stat_stability",
    "stat_transitivity",
    "stationary_distribution",
    "stream",
    "to_expfam",
    "trace_and_limit_checks",
    "transition_counts",
    "union_expfam",
    "union_log_probability",
    "uniforms",
    "validate_cef",
]
