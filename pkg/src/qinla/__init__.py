"""Error-probability bounds for Gaussian quantum illumination with a noiseless linear amplifier."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    Protocol,
    ProtocolBound,
    binomial_average,
    cs_lower,
    cs_nla_qcb,
    cs_nla_xi,
    cs_qcb,
    db_advantage,
    evaluate,
    qi_nla_qcb,
    qi_qcb,
)
from .errors import (  # noqa: E402
    CertificationFailure,
    CutoffTooSmall,
    DomainError,
    GainOutOfRange,
    NonPhysical,
    NumericalFailure,
    PhysicalityViolation,
)
from .nla import NlaConfig, effective_params, g_max, ns_max, qi_nla_conditional_states  # noqa: E402
from .states import QiScenario, cs_conditional_states, qi_conditional_states, tmsv_cm  # noqa: E402
from .symplectic import GaussianState, lower_bound, qbb, qcb, s_overlap, williamson  # noqa: E402
