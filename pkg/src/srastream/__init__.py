"""Robust streaming estimation with truncated stochastic approximation.

The core idea is a single dial pair: a truncation threshold that drops
implausibly large updates (robustness to outliers) and a step size that
controls how fast the model tracks abrupt changes (adaptivity). The package
provides the truncated-SA engine, its online-EM instantiation for Gaussian
mixtures, classical streaming baselines, contaminated stream generators,
closed-form convergence bounds, and the evaluation protocols that tie them
together.
"""

from .bounds import (
    BoundInputs,
    bound_gap,
    constant_rho_bound,
    gaussian_tail,
    max_admissible_rho,
    minimize_constant_rho_bound,
    stationary_v0n,
    step_size_consistency_report,
    truncated_sa_bound,
    untruncated_limit_bound,
)
from .gmm import (
    DegenerateComponentError,
    GmmParams,
    SingularCovarianceError,
    SuffStats,
    expected_suffstats,
    log_density,
    loss,
    m_step,
    population_suffstats,
    responsibilities,
)
from .learners import (
    GmmLearnerBase,
    IemGmmLearner,
    SdemGmmLearner,
    SemGmmLearner,
    SgdL2Learner,
    SraGmmLearner,
    StepReport,
    init_params_from_window,
    make_gmm_learner,
)
from .metrics import (
    AlarmEval,
    SegmentMse,
    alarm_eval,
    benefit,
    metric_report,
    roc_auc,
    segment_mse,
)
from .sa import (
    ConstantRho,
    InvSqrtRho,
    InvTRho,
    RhoSchedule,
    SaState,
    SraConfig,
    optimal_constant_rho,
    sa_step,
    truncate,
)
from .streams import (
    LabeledSample,
    Stream,
    StreamSpec,
    generate,
    multi_change_spec,
    benchmark_synthetic_spec,
    read_stream_csv,
    write_stream_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BoundInputs",
    "bound_gap",
    "constant_rho_bound",
    "gaussian_tail",
    "max_admissible_rho",
    "minimize_constant_rho_bound",
    "stationary_v0n",
    "step_size_consistency_report",
    "truncated_sa_bound",
    "untruncated_limit_bound",
    "DegenerateComponentError",
    "GmmParams",
    "SingularCovarianceError",
    "SuffStats",
    "expected_suffstats",
    "log_density",
    "loss",
    "m_step",
    "population_suffstats",
    "responsibilities",
    "GmmLearnerBase",
    "IemGmmLearner",
    "SdemGmmLearner",
    "SemGmmLearner",
    "SgdL2Learner",
    "SraGmmLearner",
    "StepReport",
    "init_params_from_window",
    "make_gmm_learner",
    "AlarmEval",
    "SegmentMse",
    "alarm_eval",
    "benefit",
    "metric_report",
    "roc_auc",
    "segment_mse",
    "ConstantRho",
    "InvSqrtRho",
    "InvTRho",
    "RhoSchedule",
    "SaState",
    "SraConfig",
    "optimal_constant_rho",
    "sa_step",
    "truncate",
    "LabeledSample",
    "Stream",
    "StreamSpec",
    "generate",
    "multi_change_spec",
    "benchmark_synthetic_spec",
    "read_stream_csv",
    "write_stream_csv",
]
