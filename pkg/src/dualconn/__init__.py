"""Reliability of 5G dual-connectivity architectures under correlated
radio-link failures."""

from .errors import (
    ConfigError,
    DegenerateIndicatorError,
    DomainError,
    DualConnError,
    FeasibilityError,
    UsageError,
)
from .gauss import (
    LinkBudget,
    ShadowingCorrelation,
    bivariate_tail,
    event_correlation,
    inverse_q,
    q_function,
    ran_error_from_budget,
)
from .relmodel import (
    Architecture,
    CnPathSpec,
    E2EResult,
    EventCorrelation,
    JointOutcomeProbs,
    PointFailures,
    RanPairSpec,
    Scenario,
    breakdown,
    cg_error,
    cn_path_error,
    e2e_cn_split,
    e2e_ran_split,
    evaluate,
    indicator_sigma,
    joint_outcomes,
    mgnb_leg_error,
    sx_error,
)

__version__ = "0.1.0"
