"""Distribution-shift quantification via entropic optimal transport."""

from .bound import BoundReport, assemble_bound, datashifts, empirical_error
from .data import (
    CostMatrix,
    Domain,
    EmpiricalMeasure,
    LabeledSample,
    Metric,
    cost_matrix,
    empirical_measure,
    load_csv,
)
from .lipschitz import (
    AbsoluteError,
    CrossEntropyClamped,
    LipschitzSpec,
    LossSpec,
    SquaredErrorBounded,
    layered_hypothesis_lipschitz,
    loss_lipschitz,
    verify_separate_lipschitz,
)
from .shifts import (
    ConditionalLaw,
    DeterministicLaw,
    EstimatorKind,
    GaussianLaw,
    ShiftEstimates,
    SplitScheme,
    UniformNoiseLaw,
    concept_shift,
    debiased_xshift,
    estimate_shifts,
    irreducible_error_oracle,
    plugin_xshift,
    point_w1,
    point_w1_quantile,
    total_point_shift_oracle,
)
from .sinkhorn import (
    SinkhornConvergenceError,
    SolverConfig,
    TransportPlan,
    exact_w1,
    exact_w1_plan,
    sinkhorn,
)

__version__ = "0.1.0"

__all__ = [
    "AbsoluteError",
    "BoundReport",
    "ConditionalLaw",
    "CostMatrix",
    "CrossEntropyClamped",
    "DeterministicLaw",
    "Domain",
    "EmpiricalMeasure",
    "EstimatorKind",
    "GaussianLaw",
    "LabeledSample",
    "LipschitzSpec",
    "LossSpec",
    "Metric",
    "ShiftEstimates",
    "SinkhornConvergenceError",
    "SolverConfig",
    "SplitScheme",
    "SquaredErrorBounded",
    "TransportPlan",
    "UniformNoiseLaw",
    "assemble_bound",
    "concept_shift",
    "cost_matrix",
    "datashifts",
    "debiased_xshift",
    "empirical_error",
    "empirical_measure",
    "estimate_shifts",
    "exact_w1",
    "exact_w1_plan",
    "irreducible_error_oracle",
    "layered_hypothesis_lipschitz",
    "load_csv",
    "loss_lipschitz",
    "plugin_xshift",
    "point_w1",
    "point_w1_quantile",
    "sinkhorn",
    "total_point_shift_oracle",
    "verify_separate_lipschitz",
]
