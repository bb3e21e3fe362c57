"""
Protocol-level error-probability bounds.

Five protocols are compared: quantum illumination with and without an NLA
(``QI_NLA``, ``QI``), coherent states with and without an NLA (``CS_NLA``,
``CS``) and the fidelity lower bound for coherent states (``CS_LOWER``).

With a heralded NLA only the ``k`` successful probes out of ``M`` are used;
averaging ``1/2 xi^k`` over the binomial law of ``k`` gives
``1/2 (1 + p (xi - 1))^M``, with ``p`` the success probability and ``xi``
the single-use Chernoff overlap. ``k = 0`` is the random guess ``1/2``.

Exponents are ``-(ln P - ln 1/2) / M`` so that a bound of exactly 1/2 has
exponent 0; dB comparisons are ``10 log10`` of exponent ratios.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .nla import NlaConfig, _check_thermal_gain, qi_nla_conditional_states, success_probability
from .states import QiScenario, cs_conditional_states, qi_conditional_states
from .symplectic import LN_HALF, BoundKind, BoundResult, log_fidelity_lower_bound, minimize_log_overlap

__all__ = [
    "Protocol",
    "ProtocolBound",
    "binomial_average",
    "log_binomial_average",
    "qi_qcb",
    "qi_nla_qcb",
    "cs_qcb",
    "cs_lower",
    "cs_lower_asymptotic_exponent",
    "cs_nla_xi",
    "cs_nla_qcb",
    "db_advantage",
    "evaluate",
    "check_cs_ceiling",
]

log = logging.getLogger(__name__)


class Protocol(str, enum.Enum):
    QI = "qi"
    QI_NLA = "qi_nla"
    CS = "cs"
    CS_NLA = "cs_nla"
    CS_LOWER = "cs_lower"


@dataclass(frozen=True)
class ProtocolBound:
    protocol: Protocol
    bound: BoundResult
    scenario: QiScenario
    xi: Optional[float] = None
    nla: Optional[NlaConfig] = None

    @property
    def probability(self):
        return self.bound.probability

    @property
    def log_probability(self):
        return self.bound.log_probability

    @property
    def exponent_per_use(self):
        return self.bound.exponent_per_use

    @property
    def s_star(self):
        return self.bound.s_star

    def to_dict(self):
        out = {"protocol": self.protocol.value}
        out.update(self.bound.to_dict())
        out["xi"] = self.xi
        out["scenario"] = {
            "n_s": self.scenario.n_s,
            "n_b": self.scenario.n_b,
            "kappa": self.scenario.kappa,
            "m_probes": self.scenario.m_probes,
        }
        out["nla"] = (
            None
            if self.nla is None
            else {
                "gain": self.nla.gain,
                "efficiency_divisor": self.nla.efficiency_divisor,
                "success_probability": self.nla.success_probability,
            }
        )
        return out


def _check_binomial_args(xi, p, m):
    if not 0.0 < xi <= 1.0:
        raise DomainError(f"xi must lie in (0, 1], got {xi}")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"success probability must lie in (0, 1], got {p}")
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")


def log_binomial_average(log_xi, p, m):
    """``ln[1/2 (1 + p (xi - 1))^M]`` from ``ln xi``."""
    if p == 1.0:
        # deterministic success: keep the plain product bit-for-bit
        return LN_HALF + m * log_xi
    return LN_HALF + m * math.log1p(p * math.expm1(log_xi))


def binomial_average(xi, p, m):
    """``1/2 sum_k xi^k C(M, k) p^k (1-p)^(M-k) = 1/2 (1 + p (xi - 1))^M``."""
    _check_binomial_args(xi, p, m)
    return math.exp(log_binomial_average(math.log(xi), p, int(m)))


def _closed_form_rate(scenario):
    """``kappa N_S (sqrt(N_B + 1) - sqrt(N_B))^2``, the single-use CS Chernoff exponent."""
    nb = scenario.n_b
    # sqrt(nb+1) - sqrt(nb) == 1 / (sqrt(nb+1) + sqrt(nb)), no cancellation
    return scenario.kappa * scenario.n_s / (math.sqrt(nb + 1.0) + math.sqrt(nb)) ** 2


def qi_qcb(scenario):
    """Chernoff bound for QI with all ``M`` probes and no amplifier."""
    s_star, log_xi = minimize_log_overlap(*qi_conditional_states(scenario))
    m = scenario.m_probes
    bound = BoundResult.from_log(BoundKind.QCB, LN_HALF + m * log_xi, m, s_star)
    return ProtocolBound(Protocol.QI, bound, scenario, xi=math.exp(log_xi))


def qi_nla_qcb(scenario, nla):
    """Post-selected QI with an NLA: binomial average of the single-use overlap."""
    s_star, log_xi = minimize_log_overlap(*qi_nla_conditional_states(scenario, nla))
    m = scenario.m_probes
    p = success_probability(nla)
    bound = BoundResult.from_log(BoundKind.QCB, log_binomial_average(log_xi, p, m), m, s_star)
    return ProtocolBound(Protocol.QI_NLA, bound, scenario, xi=math.exp(log_xi), nla=nla)


def cs_qcb(scenario):
    """``1/2 exp(-M kappa N_S (sqrt(N_B + 1) - sqrt(N_B))^2)``."""
    rate = _closed_form_rate(scenario)
    m = scenario.m_probes
    bound = BoundResult.from_log(BoundKind.CLOSED_FORM, LN_HALF - m * rate, m, 0.5)
    return ProtocolBound(Protocol.CS, bound, scenario, xi=math.exp(-rate))


def cs_lower(scenario):
    """Fidelity lower bound for coherent states,
    ``1/2 (1 - sqrt(1 - exp(-2 M kappa N_S (sqrt(N_B + 1) - sqrt(N_B))^2)))``."""
    rate = _closed_form_rate(scenario)
    m = scenario.m_probes
    bound = BoundResult.from_log(BoundKind.LOWER, log_fidelity_lower_bound(-rate, m), m, 0.5)
    return ProtocolBound(Protocol.CS_LOWER, bound, scenario, xi=math.exp(-rate))


def cs_lower_asymptotic_exponent(scenario):
    """Large-M limit of the :func:`cs_lower` exponent, ``2 kappa N_S (sqrt(N_B+1) - sqrt(N_B))^2``."""
    return 2.0 * _closed_form_rate(scenario)


def _log_cs_nla_xi(scenario, g):
    nb = scenario.n_b
    _check_thermal_gain(nb, g)
    d = 1.0 + nb - g * g * nb
    return -(g * g * scenario.kappa * scenario.n_s * (math.sqrt(nb + 1.0) - g * math.sqrt(nb)) ** 2) / d**3


def cs_nla_xi(scenario, g):
    """Single-use Chernoff overlap of coherent states after a successful NLA:
    ``exp(-g^2 kappa N_S (sqrt(N_B+1) - g sqrt(N_B))^2 / (1 + N_B - g^2 N_B)^3)``."""
    if g < 1.0:
        raise DomainError(f"NLA gain must be >= 1, got {g}")
    return math.exp(_log_cs_nla_xi(scenario, g))


def cs_nla_qcb(scenario, nla):
    """Post-selected coherent states with an NLA, binomially averaged."""
    log_xi = _log_cs_nla_xi(scenario, nla.gain)
    m = scenario.m_probes
    p = success_probability(nla)
    bound = BoundResult.from_log(BoundKind.CLOSED_FORM, log_binomial_average(log_xi, p, m), m, 0.5)
    return ProtocolBound(Protocol.CS_NLA, bound, scenario, xi=math.exp(log_xi), nla=nla)


def db_advantage(bound_a, bound_b):
    """``10 log10(exponent_a / exponent_b)``; positive when ``a`` decays faster."""
    ea, eb = bound_a.exponent_per_use, bound_b.exponent_per_use
    if not (ea > 0 and eb > 0):
        raise DomainError(f"dB comparison needs positive exponents, got {ea} and {eb}")
    return 10.0 * math.log10(ea / eb)


def evaluate(protocol, scenario, nla=None):
    """Dispatch on :class:`Protocol` (or its string value)."""
    protocol = Protocol(protocol)
    if protocol is Protocol.QI:
        return qi_qcb(scenario)
    if protocol is Protocol.CS:
        return cs_qcb(scenario)
    if protocol is Protocol.CS_LOWER:
        return cs_lower(scenario)
    nla = nla if nla is not None else NlaConfig()
    if protocol is Protocol.QI_NLA:
        return qi_nla_qcb(scenario, nla)
    return cs_nla_qcb(scenario, nla)


def check_cs_ceiling(scenario, nla):
    """Compare the CS+NLA exponent with the coherent-state lower-bound exponent.

    Returns the dB margin ``CS_NLA - CS_LOWER``; a positive margin means the
    amplified coherent state beats the unamplified lower bound, which is
    logged as a warning rather than raised.
    """
    margin = db_advantage(cs_nla_qcb(scenario, nla), cs_lower(scenario))
    if margin > 0:
        log.warning("CS+NLA exceeds the CS lower-bound exponent by %.3f dB at %s, %s", margin, scenario, nla)
    return margin
