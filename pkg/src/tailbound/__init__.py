"""Right-tail probability bounds computed from a density and its derivatives."""

from .bounds import BoundValue, bound, closed_form_bound, closed_form_kinds, lower_bound, shifted_coordinate, upper_bound
from .conditions import (
    CONDITION_IDS,
    ConditionEntry,
    ConditionReport,
    FeasibleRegion,
    evaluate_conditions,
    feasible_region,
    joint_region,
    thm5_master_lhs,
)
from .distributions import (
    FAMILIES,
    CatalogEntry,
    DistributionModel,
    SupportSpec,
    beta_prime,
    check_assumptions,
    chi_square_central,
    chi_square_noncentral,
    gaussian,
    gaussian_squared,
    make_catalog_distribution,
    reflect,
)
from .errors import (
    DomainError,
    InvalidParameterError,
    OracleError,
    PairingError,
    PreconditionError,
    RegionError,
    SingularDenominatorError,
    TailBoundError,
)
from .kinds import BoundKind, BoundTag
from .optimize import OptimizedParam, optimize_a, optimize_b_real_line, optimize_b_semibounded
from .oracle import GridSpec, TailValue, marcum_q, sandwich_audit, true_tail
from .pairing import PairingReport, convergence_rate, rate_bound_check, rate_class_for, select_pair
from .validation import (
    ValidationDiagnostic,
    deficit_lower,
    deficit_upper,
    integration_by_parts_check,
    monotonicity_audit,
    probe_conjecture_optimal_a,
    probe_conjecture_real_line,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "BoundValue",
    "bound",
    "closed_form_bound",
    "closed_form_kinds",
    "lower_bound",
    "shifted_coordinate",
    "upper_bound",
    "CONDITION_IDS",
    "ConditionEntry",
    "ConditionReport",
    "FeasibleRegion",
    "evaluate_conditions",
    "feasible_region",
    "joint_region",
    "thm5_master_lhs",
    "FAMILIES",
    "CatalogEntry",
    "DistributionModel",
    "SupportSpec",
    "beta_prime",
    "check_assumptions",
    "chi_square_central",
    "chi_square_noncentral",
    "gaussian",
    "gaussian_squared",
    "make_catalog_distribution",
    "reflect",
    "DomainError",
    "InvalidParameterError",
    "OracleError",
    "PairingError",
    "PreconditionError",
    "RegionError",
    "SingularDenominatorError",
    "TailBoundError",
    "BoundKind",
    "BoundTag",
    "OptimizedParam",
    "optimize_a",
    "optimize_b_real_line",
    "optimize_b_semibounded",
    "GridSpec",
    "TailValue",
    "marcum_q",
    "sandwich_audit",
    "true_tail",
    "PairingReport",
    "convergence_rate",
    "rate_bound_check",
    "rate_class_for",
    "select_pair",
    "ValidationDiagnostic",
    "deficit_lower",
    "deficit_upper",
    "integration_by_parts_check",
    "monotonicity_audit",
    "probe_conjecture_optimal_a",
    "probe_conjecture_real_line",
    "run_suite",
]
