"""Public service API."""
from .constraints import (
    demand_at,
    explicit_bounds,
    load_constraints,
    parse_constraints,
    proportional_bounds,
    validate_constraints,
)
from .dataset import (
    better_or_equal_set,
    dataset_stats,
    export_csv,
    group_mass,
    load_dataset,
    load_schema,
    make_outcome,
    read_dataset,
    top_k,
)
from .errors import (
    ConstraintError,
    DatasetError,
    IgfError,
    InfeasibleError,
    InstanceTooLarge,
    ModelError,
    SolverError,
)
from .leximin import binding_groups, leximin_solve, maximin_q
from .metrics import igf_aggregated, igf_ratio, igf_vector, leximin_compare, satisfies_bounds, sorted_igf
from .model import (
    AttributeSchema,
    Dataset,
    DatasetStats,
    DiversityConstraints,
    GroupProfile,
    IgfBounds,
    IgfVector,
    Item,
    LeximinTrace,
    Mode,
    Outcome,
    Solution,
    SolverOptions,
    SolveStatus,
)
from .oracle import brute_force_solve, feasible_outcomes
from .ordering import check_prefix_feasible, smallest_ordering
from .program import IntegerProgram, build_aggregated_model, build_model, build_ratio_model
from .report import Report, build_report
from .solver import solve_ip, solve_lp_relaxation
from .synthgen import generate, load_profile, preset

__all__ = [
    "AttributeSchema",
    "Dataset",
    "DatasetStats",
    "DiversityConstraints",
    "GroupProfile",
    "IgfBounds",
    "IgfVector",
    "IntegerProgram",
    "Item",
    "LeximinTrace",
    "Mode",
    "Outcome",
    "Report",
    "Solution",
    "SolverOptions",
    "SolveStatus",
    "ConstraintError",
    "DatasetError",
    "IgfError",
    "InfeasibleError",
    "InstanceTooLarge",
    "ModelError",
    "SolverError",
    "better_or_equal_set",
    "binding_groups",
    "brute_force_solve",
    "build_aggregated_model",
    "build_model",
    "build_ratio_model",
    "build_report",
    "check_prefix_feasible",
    "dataset_stats",
    "demand_at",
    "explicit_bounds",
    "export_csv",
    "feasible_outcomes",
    "generate",
    "group_mass",
    "igf_aggregated",
    "igf_ratio",
    "igf_vector",
    "leximin_compare",
    "leximin_solve",
    "load_constraints",
    "load_dataset",
    "load_profile",
    "load_schema",
    "make_outcome",
    "maximin_q",
    "parse_constraints",
    "preset",
    "proportional_bounds",
    "read_dataset",
    "satisfies_bounds",
    "smallest_ordering",
    "solve_ip",
    "solve_lp_relaxation",
    "sorted_igf",
    "top_k",
    "validate_constraints",
]
