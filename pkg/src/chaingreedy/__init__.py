"""Sequential greedy maximization over unreliable relay chains.

Solvers for monotone submodular maximization under a partition matroid, an
exact probability calculus for the connectivity of a lossy message-passing
chain, allocation of repeated transmission trials, and a planar sensor
coverage benchmark with a Monte Carlo harness and a command line front end.
"""

from .backends import backend_name
from .chainprob import (
    ChainSpec,
    CliqueDistribution,
    GenerativeSequence,
    OutcomeMask,
    clique_distribution,
    effective_edge_prob,
    enumerate_outcomes,
    expected_gap,
    family_probability,
    mask_probability,
    prob_clique_at_least,
    prob_clique_at_least_closed_form,
)
from .core import (
    AdditiveOracle,
    GroundElement,
    PartitionMatroid,
    SelectionResult,
    UtilityOracle,
    brute_force_optimum,
    clique_number,
    decentralized_greedy,
    deterministic_gap_bound,
    marginal_gain,
    sequential_greedy,
)
from .coverage import (
    CoverageInstance,
    CoverageOracle,
    MonteCarloReport,
    apply_permutation,
    best_known_optimum,
    coverage_value,
    generate_instance,
    load_instance,
    monte_carlo,
    run_chain_greedy,
    save_instance,
)
from .errors import ConfigError, EnumerationCapError
from .reinforce import (
    ReinforcementPlan,
    SweepReport,
    best_exhaustive_allocation,
    evaluate_single_reinforcement,
    greedy_multi_reinforcement,
    sweep_single_reinforcement,
)

__version__ = "0.1.0"

__all__ = [
    "AdditiveOracle",
    "ChainSpec",
    "CliqueDistribution",
    "ConfigError",
    "CoverageInstance",
    "CoverageOracle",
    "EnumerationCapError",
    "GenerativeSequence",
    "GroundElement",
    "MonteCarloReport",
    "OutcomeMask",
    "PartitionMatroid",
    "ReinforcementPlan",
    "SelectionResult",
    "SweepReport",
    "UtilityOracle",
    "apply_permutation",
    "backend_name",
    "best_exhaustive_allocation",
    "best_known_optimum",
    "brute_force_optimum",
    "clique_distribution",
    "clique_number",
    "coverage_value",
    "decentralized_greedy",
    "deterministic_gap_bound",
    "effective_edge_prob",
    "enumerate_outcomes",
    "evaluate_single_reinforcement",
    "expected_gap",
    "family_probability",
    "generate_instance",
    "greedy_multi_reinforcement",
    "load_instance",
    "marginal_gain",
    "mask_probability",
    "monte_carlo",
    "prob_clique_at_least",
    "prob_clique_at_least_closed_form",
    "run_chain_greedy",
    "save_instance",
    "sequential_greedy",
    "sweep_single_reinforcement",
    "__version__",
]
