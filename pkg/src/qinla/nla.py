"""
Noiseless linear amplifier (NLA) on the returned mode.

A successful ideal NLA applies ``g^n`` to the returned mode. On the output of
a ``(tau, epsilon)`` channel fed by a TMSV of parameter ``lambda`` it yields
the same state as a TMSV of parameter ``lambda_g`` through a channel
``(tau_g, epsilon_g)`` without amplification. Effective parameters are
validated and never clamped: near ``g_max`` a clamped value would describe a
different physical system.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GainOutOfRange, PhysicalityViolation
from .states import ChannelParams, channel_output_cm, coherent_mean, qi_conditional_states
from .symplectic import GaussianState

__all__ = [
    "NlaConfig",
    "EffectiveParams",
    "success_probability",
    "lambda_gain_factor",
    "lambda_upper_bound",
    "effective_params",
    "g_max",
    "ns_max",
    "qi_nla_conditional_states",
    "cs_nla_transform",
    "cs_nla_conditional_states",
]

CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class NlaConfig:
    """Gain ``g >= 1`` and efficiency divisor ``a >= 1``; success probability ``1/(a g^2)``."""

    gain: float = 1.0
    efficiency_divisor: float = 1.0

    def __post_init__(self):
        if not (self.gain >= 1.0 and math.isfinite(self.gain)):
            raise DomainError(f"NLA gain must be finite and >= 1, got {self.gain}")
        if not (self.efficiency_divisor >= 1.0 and math.isfinite(self.efficiency_divisor)):
            raise DomainError(f"efficiency divisor must be finite and >= 1, got {self.efficiency_divisor}")

    @property
    def success_probability(self):
        return success_probability(self)


def success_probability(nla):
    """Heralding probability ``1 / (a g^2)`` (``1/g^2`` for an ideal NLA)."""
    if nla.gain < 1.0 or nla.efficiency_divisor < 1.0:
        raise DomainError("success probability needs g >= 1 and a >= 1")
    return 1.0 / (nla.efficiency_divisor * nla.gain**2)


@dataclass(frozen=True)
class EffectiveParams:
    lambda_g: float
    tau_g: float
    epsilon_g: float

    def as_channel(self):
        return ChannelParams(lam=self.lambda_g, tau=min(self.tau_g, 1.0), epsilon=max(self.epsilon_g, 0.0))

    @property
    def n_b(self):
        """Effective background photons ``epsilon_g tau_g / 2``."""
        return 0.5 * self.epsilon_g * self.tau_g


def lambda_gain_factor(tau, epsilon, g):
    """``lambda_g / lambda = sqrt(((g^2-1)(eps-2) tau - 2) / ((g^2-1) eps tau - 2))``.

    Returns ``nan`` where the radicand is negative (no physical solution).
    """
    h = g * g - 1.0
    num = h * (epsilon - 2.0) * tau - 2.0
    den = h * epsilon * tau - 2.0
    if den == 0.0:
        return math.inf
    ratio = num / den
    return math.sqrt(ratio) if ratio >= 0 else math.nan


def lambda_upper_bound(tau, epsilon, g):
    """Largest ``lambda`` keeping ``lambda_g < 1`` (exclusive)."""
    f = lambda_gain_factor(tau, epsilon, g)
    if not f > 0 or math.isinf(f):
        return 0.0
    return 1.0 / f


def g_max(tau, epsilon):
    """Largest NLA gain keeping ``tau_g <= 1``.

    ``epsilon = 0`` is a sentinel returning ``inf`` (any gain is allowed on a
    pure-loss channel).
    """
    if not 0.0 < tau <= 1.0:
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    if epsilon == 0.0:
        return math.inf
    if not 0.0 < epsilon < 2.0:
        raise DomainError(f"g_max needs 0 < epsilon < 2, got {epsilon}")
    t, e = tau, epsilon
    u = t * (e - 2.0) + 2.0
    num = e * (t * (e - 4.0) + 2.0) + 4.0 * math.sqrt(u / e) - 2.0 * math.sqrt(e * u) + 4.0 * t - 4.0
    return math.sqrt(num / (t * (e - 2.0) ** 2))


def ns_max(n_b, kappa, g):
    """Largest signal energy keeping ``lambda_g < 1``:
    ``(1 - N_B (g^2 - 1)) / (kappa (g^2 - 1))``.

    Unbounded at ``g = 1``, hence a :class:`DomainError` for ``g <= 1``.
    """
    if not g > 1.0:
        raise DomainError(f"ns_max is unbounded for g <= 1 (got g={g})")
    h = g * g - 1.0
    num = 1.0 - n_b * h
    if num <= 0:
        raise DomainError(f"no admissible signal energy: N_B (g^2 - 1) = {n_b * h:.6g} >= 1")
    return num / (kappa * h)


def effective_params(params, g):
    """Map ``(lambda, tau, epsilon)`` at gain ``g`` to ``(lambda_g, tau_g, epsilon_g)``.

    Raises
    ------
    PhysicalityViolation
        ``epsilon < 2`` fails, or ``lambda_g`` leaves ``[0, 1)``.
    GainOutOfRange
        ``tau_g`` leaves ``[0, 1]``, i.e. ``g > g_max``.
    """
    if g < 1.0:
        raise DomainError(f"NLA gain must be >= 1, got {g}")
    lam, tau, eps = params.lam, params.tau, params.epsilon
    if g == 1.0:
        return EffectiveParams(lam, tau, eps)
    if eps >= 2.0:
        raise PhysicalityViolation("epsilon<2", eps, f"excess noise epsilon={eps:.6g} must be < 2 for an NLA")
    h = g * g - 1.0
    eps_g = eps - 0.5 * h * (eps - 2.0) * eps * tau
    tau_g = g * g * tau / (h * tau * (0.25 * h * (eps - 2.0) * eps * tau - eps + 1.0) + 1.0)
    lam_g = lam * lambda_gain_factor(tau, eps, g)

    if eps_g < -CONSTRAINT_TOL:
        raise PhysicalityViolation("epsilon_g>=0", eps_g)
    if not (-CONSTRAINT_TOL <= tau_g <= 1.0 + CONSTRAINT_TOL):
        raise GainOutOfRange(g, g_max(tau, eps))
    if not (0.0 <= lam_g < 1.0):
        raise PhysicalityViolation(
            "lambda_g<1",
            lam_g,
            f"lambda_g={lam_g:.6g} is not in [0, 1): lambda={lam:.6g} must stay below "
            f"{lambda_upper_bound(tau, eps, g):.6g} at g={g:.6g}",
        )
    return EffectiveParams(lam_g, tau_g, eps_g)


def qi_nla_conditional_states(scenario, nla):
    """Return-idler states after a successful NLA on the returned mode.

    H1 is the channel output of the effective system. H0 is the amplified
    background ``omega_g = 2 N_B^g + 1`` with ``N_B^g = epsilon_g tau_g / 2``
    next to the untouched idler marginal ``nu = 2 N_S + 1``: under H0 the
    returned mode is uncorrelated with the idler, so heralding on it cannot
    change the idler.
    """
    gain = nla.gain if isinstance(nla, NlaConfig) else float(nla)
    if gain == 1.0:
        return qi_conditional_states(scenario)
    eff = effective_params(scenario.channel_params(), gain)
    rho1 = channel_output_cm(eff.as_channel())
    omega_g = 2.0 * eff.n_b + 1.0
    rho0 = GaussianState(np.zeros(4), np.diag([omega_g, omega_g, scenario.nu, scenario.nu]))
    return rho0, rho1


def _check_thermal_gain(n_b, g):
    lam_th2 = n_b / (1.0 + n_b)
    if g * g * lam_th2 >= 1.0:
        raise PhysicalityViolation(
            "g*lambda_th<1", g * math.sqrt(lam_th2), f"g={g:.6g} amplifies the N_B={n_b:.6g} background beyond physicality"
        )


def cs_nla_transform(beta, n_b, g):
    """Displaced thermal state through a successful NLA.

    Returns ``(beta', omega')`` with ``beta' = g beta / (1 + N_B (1 - g^2))`` and
    ``omega' = (1 + N_B (1 + g^2)) / (1 + N_B (1 - g^2))``, i.e. the state stays
    displaced-thermal with thermal parameter ``g lambda_th``.
    """
    if g < 1.0:
        raise DomainError(f"NLA gain must be >= 1, got {g}")
    _check_thermal_gain(n_b, g)
    d = 1.0 + n_b * (1.0 - g * g)
    return g * beta / d, (1.0 + n_b * (1.0 + g * g)) / d


def cs_nla_conditional_states(scenario, g):
    """Coherent-state benchmark pair after a successful NLA (both hypotheses)."""
    beta, omega = cs_nla_transform(math.sqrt(scenario.kappa * scenario.n_s), scenario.n_b, g)
    cm = omega * np.eye(2)
    return GaussianState(np.zeros(2), cm), GaussianState(coherent_mean(beta), cm)
