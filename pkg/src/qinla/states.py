"""
Gaussian states of the quantum-illumination protocol.

Mode 1 is the returned signal R and mode 2 the retained idler I. A scenario
``(N_S, N_B, kappa, M)`` is converted into channel parameters
``(lambda, tau, epsilon)`` in one place, :meth:`QiScenario.channel_params`;
the NLA mapping in :mod:`qinla.nla` works on the latter.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .symplectic import GaussianState

__all__ = [
    "QiScenario",
    "ChannelParams",
    "tmsv_cm",
    "qi_conditional_states",
    "channel_output_cm",
    "cs_conditional_states",
    "coherent_mean",
]

_Z = np.diag([1.0, -1.0])
_I = np.eye(2)


def _two_mode(a, c, b):
    return np.block([[a * _I, c * _Z], [c * _Z, b * _I]])


@dataclass(frozen=True)
class QiScenario:
    """One target-detection problem.

    Parameters
    ----------
    n_s : float
        Mean signal photons per mode, ``>= 0``.
    n_b : float
        Mean background photons per mode, ``>= 0``.
    kappa : float
        Target reflectivity (end-to-end transmissivity), in ``(0, 1)``.
    m_probes : int
        Number of probes ``M >= 1``.
    """

    n_s: float
    n_b: float
    kappa: float
    m_probes: int = 1

    def __post_init__(self):
        if not (self.n_s >= 0 and math.isfinite(self.n_s)):
            raise DomainError(f"n_s must be finite and >= 0, got {self.n_s}")
        if not (self.n_b >= 0 and math.isfinite(self.n_b)):
            raise DomainError(f"n_b must be finite and >= 0, got {self.n_b}")
        if not 0.0 < self.kappa < 1.0:
            raise DomainError(f"kappa must lie in (0, 1), got {self.kappa}")
        if int(self.m_probes) != self.m_probes or self.m_probes < 1:
            raise DomainError(f"m_probes must be a positive integer, got {self.m_probes}")
        object.__setattr__(self, "m_probes", int(self.m_probes))

    @property
    def nu(self):
        """Signal/idler variance ``2 N_S + 1``."""
        return 2.0 * self.n_s + 1.0

    @property
    def omega(self):
        """Background variance ``2 N_B + 1``."""
        return 2.0 * self.n_b + 1.0

    @property
    def gamma(self):
        """Returned-mode variance under H1, ``2 kappa N_S + omega``."""
        return 2.0 * self.kappa * self.n_s + self.omega

    @property
    def c_q(self):
        """TMSV quadrature correlation ``2 sqrt(N_S (N_S + 1))``."""
        return 2.0 * math.sqrt(self.n_s * (self.n_s + 1.0))

    def channel_params(self):
        """``lambda^2 = N_S/(N_S+1)``, ``tau = kappa``, ``epsilon = 2 N_B / kappa``."""
        return ChannelParams(
            lam=math.sqrt(self.n_s / (self.n_s + 1.0)),
            tau=self.kappa,
            epsilon=2.0 * self.n_b / self.kappa,
        )

    def replace(self, **changes):
        fields = {"n_s": self.n_s, "n_b": self.n_b, "kappa": self.kappa, "m_probes": self.m_probes}
        fields.update(changes)
        return QiScenario(**fields)


@dataclass(frozen=True)
class ChannelParams:
    """TMSV parameter ``lam`` sent through a channel of transmissivity ``tau``
    and excess noise ``epsilon`` (shot-noise units, referred to the input)."""

    lam: float
    tau: float
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise DomainError(f"lambda must lie in [0, 1), got {self.lam}")
        if not 0.0 < self.tau <= 1.0:
            raise DomainError(f"tau must lie in (0, 1], got {self.tau}")
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise DomainError(f"epsilon must be finite and >= 0, got {self.epsilon}")

    @property
    def variance(self):
        """``V = (1 + lambda^2) / (1 - lambda^2)``."""
        l2 = self.lam * self.lam
        return (1.0 + l2) / (1.0 - l2)

    @property
    def loss_noise(self):
        """Input-equivalent loss noise ``B = (1 - tau) / tau``."""
        return (1.0 - self.tau) / self.tau

    @property
    def n_s(self):
        l2 = self.lam * self.lam
        return l2 / (1.0 - l2)


def tmsv_cm(n_s):
    """Two-mode squeezed vacuum with ``n_s`` photons per mode."""
    if not n_s >= 0:
        raise DomainError(f"n_s must be >= 0, got {n_s}")
    nu = 2.0 * n_s + 1.0
    c_q = 2.0 * math.sqrt(n_s * (n_s + 1.0))
    return GaussianState(np.zeros(4), _two_mode(nu, c_q, nu))


def qi_conditional_states(scenario):
    """Return-idler states ``(rho0, rho1)`` under target absence / presence.

    H0: ``diag(omega 1, nu 1)``; H1: ``[[gamma 1, sqrt(kappa) c_q Z], [., nu 1]]``.
    The background under H1 has ``N_B / (1 - kappa)`` photons so the returned
    thermal noise is the same under both hypotheses.
    """
    sc = scenario
    rho0 = GaussianState(np.zeros(4), _two_mode(sc.omega, 0.0, sc.nu))
    rho1 = GaussianState(np.zeros(4), _two_mode(sc.gamma, math.sqrt(sc.kappa) * sc.c_q, sc.nu))
    return rho0, rho1


def channel_output_cm(params):
    """CM of a TMSV whose first mode went through ``(tau, epsilon)``.

    ``[[tau (V + B + eps) 1, sqrt(tau (V^2 - 1)) Z], [., V 1]]``.
    """
    v = params.variance
    a = params.tau * (v + params.loss_noise + params.epsilon)
    # V^2 - 1 = 4 lambda^2 / (1 - lambda^2)^2, written out to avoid cancellation at small lambda
    c = 2.0 * params.lam * math.sqrt(params.tau) / (1.0 - params.lam * params.lam)
    return GaussianState(np.zeros(4), _two_mode(a, c, v))


def coherent_mean(beta):
    """Mean vector of amplitude ``beta`` (real) in vacuum-equals-identity units."""
    return np.array([2.0 * beta, 0.0])


def cs_conditional_states(scenario):
    """Coherent-state benchmark: thermal vs displaced thermal return mode.

    The probe ``|sqrt(N_S)>`` returns with amplitude ``sqrt(kappa N_S)``, i.e.
    mean vector ``(2 sqrt(kappa N_S), 0)`` in the units of this package; both
    hypotheses have CM ``omega 1``.
    """
    sc = scenario
    cm = sc.omega * _I
    rho0 = GaussianState(np.zeros(2), cm)
    rho1 = GaussianState(coherent_mean(math.sqrt(sc.kappa * sc.n_s)), cm)
    return rho0, rho1
