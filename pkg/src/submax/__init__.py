"""Query-efficient maximization of non-negative submodular functions under
a cardinality constraint, with instrumented oracles and a benchmark harness."""

from .baselines import (
    guided_random_greedy,
    local_search,
    random_greedy,
    sample_greedy,
    warmup_solve,
)
from .config import SolverConfig
from .fastsolve import (
    BoundParams,
    LocalOptReport,
    check_local_opt_condition,
    fast_local_search,
    guided_stochastic_greedy,
    init_solution,
    optimize_bound_params,
    solve_main,
)
from .objectives import (
    COVERAGE,
    CUT,
    FACILITY,
    Instance,
    OptCertificate,
    brute_force_opt,
    coverage_diversity_value,
    cut_value,
    facility_diversity_value,
    gen_synthetic,
    make_evaluator,
    make_handle,
)
from .oracle import (
    GroundSet,
    OracleHandle,
    QueryLedger,
    RngStream,
    Solution,
    make_ground_set,
    submodularity_probe,
)

__all__ = [
    "BoundParams",
    "COVERAGE",
    "CUT",
    "FACILITY",
    "GroundSet",
    "Instance",
    "LocalOptReport",
    "OptCertificate",
    "OracleHandle",
    "QueryLedger",
    "RngStream",
    "Solution",
    "SolverConfig",
    "brute_force_opt",
    "check_local_opt_condition",
    "coverage_diversity_value",
    "cut_value",
    "facility_diversity_value",
    "fast_local_search",
    "gen_synthetic",
    "guided_random_greedy",
    "guided_stochastic_greedy",
    "init_solution",
    "local_search",
    "make_evaluator",
    "make_ground_set",
    "make_handle",
    "optimize_bound_params",
    "random_greedy",
    "sample_greedy",
    "solve_main",
    "submodularity_probe",
    "warmup_solve",
]
