"""Exact constrained k-submodular maximization via delayed constraint
generation, with a built-in LP/branch-and-bound engine and a
verification suite for small instances."""

from ._kernels import active_kernel_name, available_kernels
from .cuts import Cut, build_cut_general, build_cut_monotone, cut_rhs, monotone_transform
from .dcg import DcgConfig, FeasibleRegion, SolveReport, compile_region, solve
from .ksets import (
    CharVector,
    GroundSet,
    KSet,
    format_kset,
    from_char_vector,
    is_partition,
    join,
    meet,
    parse_kset,
    to_char_vector,
)
from .milp import BBResult, LinearConstraint, MasterProblem
from .oracles import (
    CoverageOracle,
    EntropyOracle,
    ModularOracle,
    ObservationMatrix,
    TableOracle,
    ValueOracle,
    coverage_oracle,
    entropy_oracle,
    modular_oracle,
    table_oracle,
    xi_bound,
    xi_exact,
    xi_exact_all,
)
from .verify import (
    ESResult,
    InfeasibleRegionError,
    VerificationReport,
    check_k_submodular,
    check_k_submodular_marginals,
    check_monotone,
    count_exact_feasible,
    count_feasible_upto,
    exhaustive_max,
)

__version__ = "0.1.0"
