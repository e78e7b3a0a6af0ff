"""Greedy maximization of monotone k-submodular functions under a value oracle."""

__version__ = "0.1.0"

from .algorithms import (
    AlgorithmConfig,
    RunReport,
    WeightedSupport,
    approximation_ratio,
    brute_force_opt,
    certificate_check,
    deterministic_greedy,
    exact_expectation,
    fill_unassigned,
    query_bound,
    randomized_greedy,
    replay_certificates,
)
from .core import (
    GroundSet,
    PropertyReport,
    TableOracle,
    check_k_submodular,
    check_monotone,
    check_orthant_submodular,
    check_pairwise_monotone,
    join,
    leq,
    marginal_gain,
    meet,
    project_optimal,
)
from .estimators import DeterministicGreedyMaximizer, RandomizedGreedyMaximizer
from .exceptions import (
    BudgetExceededError,
    InstanceError,
    InternalInvariantError,
    KSubmaxError,
)
from .instances import (
    CountingOracle,
    Instance,
    build_assignment_modular,
    build_separable_coverage,
    build_table,
    load_instance,
    random_monotone_instance,
    wrap_counting,
)
from .lp import assemble, feasible_witness, find_extreme_point, verify_basic
