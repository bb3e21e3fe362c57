"""
Brute-force Fock-basis validator for the Gaussian pipeline.

Builds the protocol states in a truncated photon-number basis, TMSV source
then thermal-loss channel on the signal then heralded ``g^n`` on the return,
and computes ``Tr[rho0^s rho1^(1-s)]`` by eigendecomposition. Nothing here
uses covariance matrices, so agreement with :mod:`qinla.symplectic` certifies
the effective-parameter mapping end to end.

Deliberately dense and slow: matrices are ``D^2 x D^2`` for two modes.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .errors import CertificationFailure, CutoffTooSmall, DomainError, NumericalFailure
from .nla import NlaConfig, qi_nla_conditional_states
from .symplectic import log_s_overlap

__all__ = [
    "FockState",
    "annihilation",
    "tmsv_fock",
    "thermal_fock",
    "coherent_fock",
    "beamsplitter",
    "thermal_loss_fock",
    "nla_fock",
    "s_overlap_fock",
    "quadrature_moments",
    "CertificationReport",
    "certify_pipeline",
]

DEFICIT_TOL = 1e-8
TAIL_TOL = 1e-8
ENV_MASS = 1.0 - 1e-10
EIG_CLIP = 1e-14
CERTIFY_TOL = 1e-5
START_CUTOFF = 25
MAX_CUTOFF = 50


@dataclass(frozen=True, eq=False)
class FockState:
    """Density matrix on ``n_modes`` modes, each truncated to ``cutoff`` levels.

    ``trace_deficit`` is ``1 - trace`` before the matrix was renormalised.
    Index order is mode-major (``np.kron`` order).
    """

    matrix: np.ndarray
    cutoff: int
    n_modes: int
    trace_deficit: float = 0.0

    def tensor(self):
        d = self.cutoff
        return self.matrix.reshape((d,) * (2 * self.n_modes))

    def reduced(self, mode_index):
        """Single-mode marginal."""
        t = self.tensor()
        n = self.n_modes
        keep = mode_index
        letters = "abcdefghijklmnop"
        ket = list(letters[:n])
        bra = list(letters[n : 2 * n])
        for k in range(n):
            if k != keep:
                bra[k] = ket[k]
        spec = "".join(ket) + "".join(bra) + "->" + ket[keep] + bra[keep]
        return np.einsum(spec, t)

    def photon_distribution(self, mode_index):
        return np.real(np.diag(self.reduced(mode_index)))


def _normalised(matrix, cutoff, n_modes, prior_deficit=0.0):
    tr = float(np.real(np.trace(matrix)))
    deficit = 1.0 - tr + prior_deficit
    return FockState(matrix / tr, cutoff, n_modes, deficit)


def annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)


def tmsv_fock(lam, cutoff):
    """Truncated ``sqrt(1 - lam^2) sum_n lam^n |n>|n>`` as a two-mode density matrix."""
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    d = cutoff
    amps = math.sqrt(1.0 - lam * lam) * lam ** np.arange(d, dtype=float)
    psi = np.zeros((d, d))
    psi[np.arange(d), np.arange(d)] = amps
    psi = psi.reshape(-1)
    state = _normalised(np.outer(psi, psi), d, 2)
    if state.trace_deficit >= DEFICIT_TOL:
        raise CutoffTooSmall(f"TMSV tail {state.trace_deficit:.3g} at cutoff {d}")
    return state


def thermal_fock(n_mean, cutoff):
    """Single-mode thermal state, renormalised after truncation."""
    if n_mean < 0:
        raise DomainError(f"thermal photon number must be >= 0, got {n_mean}")
    l2 = n_mean / (1.0 + n_mean)
    probs = (1.0 - l2) * l2 ** np.arange(cutoff, dtype=float)
    return _normalised(np.diag(probs), cutoff, 1)


def coherent_fock(alpha, cutoff):
    """Single-mode coherent state ``|alpha>``."""
    n = np.arange(cutoff)
    mag = abs(alpha)
    if mag == 0:
        amps = np.zeros(cutoff, dtype=complex)
        amps[0] = 1.0
    else:
        log_fact = np.array([math.lgamma(k + 1) for k in n])
        log_amp = -0.5 * mag * mag + n * math.log(mag) - 0.5 * log_fact
        amps = np.exp(log_amp) * np.exp(1j * np.angle(alpha) * n)
    return _normalised(np.outer(amps, amps.conj()), cutoff, 1)


@lru_cache(maxsize=16)
def beamsplitter(kappa, cutoff):
    """Beamsplitter of transmissivity ``kappa`` on (signal, environment).

    Returned as a read-only tensor ``U[x, e_out, s, e_in]``. Built from
    ``exp(theta (a^dag b - a b^dag))`` at the working cutoff; blocks of total
    photon number ``< cutoff`` are exact.
    """
    d = cutoff
    a = annihilation(d)
    eye = np.eye(d)
    sig, env = np.kron(a, eye), np.kron(eye, a)
    theta = math.acos(math.sqrt(kappa))
    u = expm(theta * (sig.T @ env - sig @ env.T))
    u = u.reshape(d, d, d, d)
    u.setflags(write=False)
    return u


def _move_mode_first(tensor, mode_index, n_modes):
    order = list(range(2 * n_modes))
    ket = order.pop(mode_index)
    bra = order.pop(mode_index + n_modes - 1)
    return np.transpose(tensor, [ket] + order[: n_modes - 1] + [bra] + order[n_modes - 1 :])


def _restore_mode(tensor, mode_index, n_modes):
    order = list(range(2 * n_modes))
    ket = order.pop(mode_index)
    bra = order.pop(mode_index + n_modes - 1)
    perm = [ket] + order[: n_modes - 1] + [bra] + order[n_modes - 1 :]
    return np.transpose(tensor, np.argsort(perm))


def _apply_local_kraus(rho, mode_index, kraus_ops):
    """``sum_k K_k rho K_k^dag`` with every ``K_k`` acting on one mode."""
    d, n = rho.cutoff, rho.n_modes
    r = d ** (n - 1)
    t = _move_mode_first(rho.tensor(), mode_index, n).reshape(d, r, d, r)
    out = np.zeros_like(t, dtype=np.result_type(t, *kraus_ops))
    for k in kraus_ops:
        left = np.tensordot(k, t, axes=(1, 0))
        out += np.tensordot(left, k.conj(), axes=(2, 1)).transpose(0, 1, 3, 2)
    out = _restore_mode(out.reshape((d,) * (2 * n)), mode_index, n)
    return out.reshape(d**n, d**n)


def thermal_loss_fock(rho, mode_index, kappa, n_b_env, cutoff=None, lookahead_gain=1.0):
    """Mix ``mode_index`` with a thermal environment on a beamsplitter.

    ``a_out = sqrt(kappa) a + sqrt(1 - kappa) b`` with ``b`` thermal of mean
    ``n_b_env``. The environment is expanded as a Fock mixture, truncated once
    its cumulative weight exceeds ``1 - 1e-10``.

    If the output will later be amplified by ``g^n``, pass that gain as
    ``lookahead_gain``: a dropped environment level ``n`` is then boosted by up
    to ``g^(2n)``, so the sum continues until the amplified remainder is below
    ``1e-10`` as well (or the cutoff is reached).
    """
    d = rho.cutoff if cutoff is None else cutoff
    if d != rho.cutoff:
        raise DomainError("re-truncation is not supported; build the input at the working cutoff")
    if not 0.0 <= kappa <= 1.0:
        raise DomainError(f"kappa must lie in [0, 1], got {kappa}")
    if n_b_env < 0:
        raise DomainError(f"environment photon number must be >= 0, got {n_b_env}")
    u = beamsplitter(float(kappa), d)
    l2 = n_b_env / (1.0 + n_b_env)
    g2 = float(lookahead_gain) ** 2
    kraus, cum, n = [], 0.0, 0
    while cum <= ENV_MASS or (n < d and (1.0 - cum) * g2**n > 1.0 - ENV_MASS):
        if n >= d:
            raise CutoffTooSmall(f"thermal environment (N={n_b_env:.3g}) not resolved at cutoff {d}")
        p = (1.0 - l2) * l2**n
        w = math.sqrt(p)
        kraus.extend(w * u[:, e, :, n] for e in range(d))
        cum += p
        n += 1
    out = _apply_local_kraus(rho, mode_index, kraus)
    state = _normalised(out, d, rho.n_modes, rho.trace_deficit)
    if state.trace_deficit >= DEFICIT_TOL:
        raise CutoffTooSmall(f"loss channel leaked {state.trace_deficit:.3g} of the trace at cutoff {d}")
    return state


def nla_fock(rho, mode_index, g):
    """Apply ``g^n`` to one mode; return ``(normalised state, success weight)``.

    The success weight is the trace before renormalisation. Raises
    :class:`CutoffTooSmall` if the amplified mode keeps ``>= 1e-8`` population
    in its top two levels.
    """
    if g < 1.0:
        raise DomainError(f"NLA gain must be >= 1, got {g}")
    d = rho.cutoff
    gain = np.diag(float(g) ** np.arange(d, dtype=float))
    out = _apply_local_kraus(rho, mode_index, [gain])
    weight = float(np.real(np.trace(out)))
    state = FockState(out / weight, d, rho.n_modes, rho.trace_deficit)
    tail = float(np.sum(state.photon_distribution(mode_index)[-2:]))
    if tail >= TAIL_TOL:
        raise CutoffTooSmall(f"amplified tail population {tail:.3g} at cutoff {d} (g={g})")
    return state, weight


def _matrix_power(rho, s):
    w, v = np.linalg.eigh(rho)
    w = np.where(w < EIG_CLIP, 0.0, w)
    return (v * w**s) @ v.conj().T


def s_overlap_fock(rho0, rho1, s):
    """``Tr[rho0^s rho1^(1-s)]`` by eigendecomposition (eigenvalues below 1e-14 dropped)."""
    m0 = rho0.matrix if isinstance(rho0, FockState) else np.asarray(rho0)
    m1 = rho1.matrix if isinstance(rho1, FockState) else np.asarray(rho1)
    for m in (m0, m1):
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise NumericalFailure("density matrix is not Hermitian")
    return float(np.real(np.trace(_matrix_power(m0, s) @ _matrix_power(m1, 1.0 - s))))


def quadrature_moments(rho):
    """Mean vector and CM in the vacuum-equals-identity convention."""
    d, n = rho.cutoff, rho.n_modes
    a = annihilation(d)
    q1 = a + a.T
    p1 = -1j * (a - a.T)
    ops = []
    for k in range(n):
        for local in (q1, p1):
            full = np.eye(1)
            for j in range(n):
                full = np.kron(full, local if j == k else np.eye(d))
            ops.append(full)
    m = rho.matrix
    mean = np.array([np.real(np.trace(m @ x)) for x in ops])
    cm = np.empty((2 * n, 2 * n))
    for i, xi in enumerate(ops):
        for j, xj in enumerate(ops):
            sym = 0.5 * np.trace(m @ (xi @ xj + xj @ xi))
            cm[i, j] = np.real(sym) - mean[i] * mean[j]
    return mean, cm


def qi_fock_states(scenario, g, cutoff):
    """Physical H0/H1 return-idler states after a successful NLA.

    Returns ``(rho0, rho1, weights)`` with the unnormalised NLA success
    weights of each hypothesis.
    """
    lam = math.sqrt(scenario.n_s / (scenario.n_s + 1.0))
    source = tmsv_fock(lam, cutoff)
    h0 = thermal_loss_fock(source, 0, 0.0, scenario.n_b, lookahead_gain=g)
    h1 = thermal_loss_fock(source, 0, scenario.kappa, scenario.n_b / (1.0 - scenario.kappa), lookahead_gain=g)
    rho0, w0 = nla_fock(h0, 0, g)
    rho1, w1 = nla_fock(h1, 0, g)
    return rho0, rho1, (w0, w1)


@dataclass
class CertificationReport:
    n_s: float
    n_b: float
    kappa: float
    gain: float
    cutoff: int
    s_grid: list
    oracle: list
    gaussian: list
    rel_deviation: list
    max_rel_deviation: float
    trace_deficits: dict = field(default_factory=dict)
    tail_populations: dict = field(default_factory=dict)
    success_weights: dict = field(default_factory=dict)
    certified: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def _oracle_limits(scenario, g):
    if scenario.n_s > 0.3 or scenario.n_b > 0.3 or g > 2.2:
        raise DomainError("the Fock oracle is restricted to N_S, N_B <= 0.3 and g <= 2.2")


def certify_pipeline(scenario, nla, s_grid=(0.3, 0.5, 0.7), cutoff=None, tol=CERTIFY_TOL):
    """Compare Fock-oracle and Gaussian-route ``C_s`` on ``s_grid``.

    With ``cutoff=None`` the cutoff starts at 25 and doubles (up to 50) until
    the truncation diagnostics pass; an explicit cutoff is used as given.

    Raises
    ------
    CutoffTooSmall
        Truncation diagnostics fail at the largest cutoff tried.
    CertificationFailure
        Maximum relative deviation exceeds ``tol``; the report is attached.
    """
    g = nla.gain if isinstance(nla, NlaConfig) else float(nla)
    _oracle_limits(scenario, g)
    cutoffs = [cutoff] if cutoff is not None else []
    if cutoff is None:
        d = START_CUTOFF
        while d <= MAX_CUTOFF:
            cutoffs.append(d)
            d *= 2
    last_error = None
    for d in cutoffs:
        try:
            rho0, rho1, weights = qi_fock_states(scenario, g, d)
        except CutoffTooSmall as exc:
            last_error = exc
            continue
        break
    else:
        raise last_error

    g0, g1 = qi_nla_conditional_states(scenario, g)
    oracle, gauss, dev = [], [], []
    for s in s_grid:
        c_f = s_overlap_fock(rho0, rho1, s)
        c_g = math.exp(log_s_overlap(g0, g1, s))
        oracle.append(c_f)
        gauss.append(c_g)
        dev.append(abs(c_g - c_f) / abs(c_f))
    report = CertificationReport(
        n_s=scenario.n_s,
        n_b=scenario.n_b,
        kappa=scenario.kappa,
        gain=g,
        cutoff=d,
        s_grid=list(s_grid),
        oracle=oracle,
        gaussian=gauss,
        rel_deviation=dev,
        max_rel_deviation=max(dev),
        trace_deficits={"h0": rho0.trace_deficit, "h1": rho1.trace_deficit},
        tail_populations={
            "h0": float(np.sum(rho0.photon_distribution(0)[-2:])),
            "h1": float(np.sum(rho1.photon_distribution(0)[-2:])),
        },
        success_weights={"h0": weights[0], "h1": weights[1]},
    )
    report.certified = report.max_rel_deviation <= tol
    if not report.certified:
        raise CertificationFailure(
            f"Fock oracle and Gaussian route differ by {report.max_rel_deviation:.3g} (> {tol:g})", report
        )
    return report
