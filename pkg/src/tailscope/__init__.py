"""tailscope: outlier diagnostics for heavy-tailed and sharply peaked laws."""

from .distributions import (
    DistributionModel,
    Gaussian,
    Laplace,
    Pareto,
    PutTailDown,
    ReciprocalPareto,
    SampleBatch,
    SymmetricPareto,
    SymmetricReciprocalPareto,
    SymmetricStable,
    ThreePointExtremal,
    extremal_three_point,
    parse_model,
    ptd_outlier_gain_condition,
    ptd_tail_probability,
    put_tail_down,
    reciprocal_pareto_stats,
    sample,
    selberg_bound,
)
from .errors import (
    AtomicPointError,
    BoundaryError,
    DegenerateSampleError,
    EmptyInputError,
    ParameterDomainError,
    QuadratureError,
    SpecValidationError,
    TailscopeError,
    UnsupportedError,
)
from .estimators import (
    EstimateWithCI,
    OrderedAbsSample,
    beta_outlier_test,
    first_kind_prob_mc,
    first_kind_rate,
    max_ratio_event,
    max_ratio_prob_mc,
    min_ratio_event,
    min_ratio_prob_mc,
    multimodal_first_kind,
    stability_index_estimate,
    summary_stats,
)
from .oracles import (
    exact_max_ratio_prob,
    exact_min_ratio_complement,
    exact_min_ratio_prob,
    gaussian_first_kind_finite_n,
    gaussian_first_kind_reference,
    joint_extreme_pair_density,
    limit_max_ratio,
    limit_min_ratio,
    quadrature,
)

__version__ = "0.1.0"
