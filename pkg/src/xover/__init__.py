"""Crossover designs comparing test treatments with a control.

The package builds p-period, n-unit designs over labels 0..t (0 is the
control), evaluates them under interference-adjusted linear models,
computes class-wide trace lower bounds, and certifies optimality or
reports efficiency against the bound.
"""

from .bounds import (
    BoundProfile,
    ControlSums,
    InfeasibleError,
    ProfileEntry,
    TraceBound,
    class_trace_bound,
    design_trace_bound,
    min_control_sums,
    optimize_r0,
)
from .construct import (
    ConstructionError,
    ExistenceError,
    SearchConfig,
    balanced_uniform,
    construct,
    existence_quotients,
    rotating_substitution,
    substitute_control,
    three_step_construct,
)
from .design import (
    Design,
    DesignCounts,
    DesignParseError,
    compute_counts,
    parse_design,
    render_design,
)
from .efficiency import (
    EfficiencyReport,
    IneligibleDesignError,
    efficiency_carryover,
    efficiency_report,
    reduced_model_bound,
    reproduce_table,
    zero_way_bound,
)
from .model import (
    DisconnectedDesignError,
    ModelKind,
    a_criterion,
    c_matrix,
    contrast_covariance,
    is_completely_symmetric,
    m_matrix,
    mv_criterion,
)
from .verify import BalanceReport, Certificate, certify, verify_balance

__version__ = "0.1.0"

__all__ = [
    "BalanceReport",
    "BoundProfile",
    "Certificate",
    "ConstructionError",
    "ControlSums",
    "Design",
    "DesignCounts",
    "DesignParseError",
    "DisconnectedDesignError",
    "EfficiencyReport",
    "ExistenceError",
    "IneligibleDesignError",
    "InfeasibleError",
    "ModelKind",
    "ProfileEntry",
    "SearchConfig",
    "TraceBound",
    "a_criterion",
    "balanced_uniform",
    "c_matrix",
    "certify",
    "class_trace_bound",
    "compute_counts",
    "construct",
    "contrast_covariance",
    "design_trace_bound",
    "efficiency_carryover",
    "efficiency_report",
    "existence_quotients",
    "is_completely_symmetric",
    "m_matrix",
    "min_control_sums",
    "mv_criterion",
    "optimize_r0",
    "parse_design",
    "render_design",
    "reduced_model_bound",
    "reproduce_table",
    "rotating_substitution",
    "substitute_control",
    "three_step_construct",
    "verify_balance",
    "zero_way_bound",
    "__version__",
]
