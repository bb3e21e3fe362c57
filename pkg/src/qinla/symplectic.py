"""
Gaussian-state algebra: symplectic spectra, Williamson decomposition and
the s-overlap bounds (Chernoff, Bhattacharyya, fidelity lower bound).

Conventions
-----------
Quadratures are ordered ``(q1, p1, q2, p2, ...)`` with ``q = a + a^dag`` and
``p = -i(a - a^dag)``, so the vacuum covariance matrix is the **identity**
and a thermal state with mean photon number ``N`` has CM ``(2N + 1) * 1``.
Mean vectors use the same units: a coherent state ``|alpha>`` has mean
``(2 Re alpha, 2 Im alpha)``. Mixing in the ``hbar = 1`` (vacuum = 1/2)
convention silently corrupts every bound computed here.
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar

from .errors import DimensionMismatch, DomainError, NonPhysical, NumericalFailure

__all__ = [
    "GaussianState",
    "WilliamsonDecomposition",
    "BoundKind",
    "BoundResult",
    "symplectic_form",
    "symplectic_eigenvalues",
    "williamson",
    "g_func",
    "lambda_func",
    "s_overlap",
    "log_s_overlap",
    "qcb",
    "qbb",
    "lower_bound",
]

PHYSICAL_TOL = 1e-9
SYMMETRY_TOL = 1e-12
S_MARGIN = 1e-6
S_XTOL = 1e-8
OVERLAP_NOISE = 1e-14
LN_HALF = math.log(0.5)


def symplectic_form(n_modes):
    """Return the ``2n x 2n`` symplectic form ``Omega = (+) [[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _as_cm(cm):
    cm = np.asarray(cm, dtype=float)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise DimensionMismatch(f"covariance matrix must be square, got shape {cm.shape}")
    if cm.shape[0] % 2:
        raise DimensionMismatch(f"covariance matrix must have even size, got {cm.shape[0]}")
    return cm


@dataclass(frozen=True, eq=False)
class GaussianState:
    """N-mode Gaussian state given by its mean vector and covariance matrix.

    Construction checks symmetry (``1e-12`` absolute) and physicality
    (all symplectic eigenvalues ``>= 1 - 1e-9``). Pass ``validate=False``
    through :meth:`unchecked` to skip the physicality check.
    """

    mean: np.ndarray
    cm: np.ndarray

    def __post_init__(self):
        self._init(validate=True)

    def _init(self, validate):
        cm = _as_cm(self.cm)
        n2 = cm.shape[0]
        mean = np.zeros(n2) if self.mean is None else np.asarray(self.mean, dtype=float).reshape(-1)
        if mean.shape != (n2,):
            raise DimensionMismatch(f"mean has length {mean.size}, expected {n2}")
        if np.max(np.abs(cm - cm.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(cm))):
            raise DomainError("covariance matrix is not symmetric")
        cm = 0.5 * (cm + cm.T)
        cm.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cm", cm)
        object.__setattr__(self, "mean", mean)
        if validate:
            nus = symplectic_eigenvalues(cm)
            if nus[-1] < 1.0 - PHYSICAL_TOL:
                raise NonPhysical(f"symplectic eigenvalue {nus[-1]:.12g} < 1")

    @classmethod
    def unchecked(cls, cm, mean=None):
        """Build a state without the physicality check (symmetry still enforced)."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "cm", cm)
        object.__setattr__(obj, "mean", mean)
        obj._init(validate=False)
        return obj

    @classmethod
    def vacuum(cls, n_modes=1):
        return cls(np.zeros(2 * n_modes), np.eye(2 * n_modes))

    @classmethod
    def thermal(cls, n_mean, mean=None):
        """Single-mode (displaced) thermal state with ``n_mean`` photons."""
        if n_mean < 0:
            raise DomainError(f"thermal photon number must be >= 0, got {n_mean}")
        return cls(np.zeros(2) if mean is None else mean, (2.0 * n_mean + 1.0) * np.eye(2))

    @property
    def n_modes(self):
        return self.cm.shape[0] // 2

    def __repr__(self):
        return f"GaussianState(n_modes={self.n_modes}, mean={self.mean.tolist()}, cm={self.cm.tolist()})"


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """``cm = s_matrix @ diag(nu_1, nu_1, ..., nu_N, nu_N) @ s_matrix.T``."""

    s_matrix: np.ndarray
    spectrum: np.ndarray

    def normal_form(self):
        return np.diag(np.repeat(self.spectrum, 2))

    def reconstruct(self):
        return self.s_matrix @ self.normal_form() @ self.s_matrix.T


def _two_mode_spectrum(cm):
    a, b, c = cm[:2, :2], cm[2:, 2:], cm[:2, 2:]
    delta = np.linalg.det(a) + np.linalg.det(b) + 2.0 * np.linalg.det(c)
    det = np.linalg.det(cm)
    disc = delta * delta - 4.0 * det
    # near-degenerate pairs lose half their digits in the square root
    if det <= 0 or disc < 1e-6 * delta * delta:
        return None
    root = math.sqrt(max(disc, 0.0))
    nu_plus2 = 0.5 * (delta + root)
    if nu_plus2 <= 0:
        return None
    # product form avoids cancellation in the smaller root
    nu_minus2 = det / nu_plus2
    return np.array([math.sqrt(nu_plus2), math.sqrt(nu_minus2)])


def _hermitian_spectrum(cm):
    # eig(i Omega V) shares its spectrum with the Hermitian i V^1/2 Omega V^1/2
    n = cm.shape[0] // 2
    w, u = np.linalg.eigh(cm)
    if w[0] <= 0:
        ev = np.linalg.eigvals(1j * symplectic_form(n) @ cm)
        return np.sort(np.abs(ev))[::-1][::2]
    root = (u * np.sqrt(w)) @ u.T
    t = np.linalg.eigvalsh(1j * root @ symplectic_form(n) @ root)
    return np.sort(t[n:])[::-1]


def symplectic_eigenvalues(cm, validate=False):
    """Symplectic eigenvalues of a covariance matrix, sorted descending.

    These are the moduli of the eigenvalues of ``i Omega cm``. Two-mode
    matrices use the closed form ``nu^2 = (Delta +- sqrt(Delta^2 - 4 det V)) / 2``
    with ``Delta = det A + det B + 2 det C``; other sizes (and two-mode
    inputs where the closed form is ill-defined) go through the eigenvalues.

    Parameters
    ----------
    cm : array_like
        Symmetric ``2N x 2N`` matrix.
    validate : bool
        Raise :class:`NonPhysical` if any eigenvalue is below ``1 - 1e-9``.

    Returns
    -------
    numpy.ndarray
        ``N`` eigenvalues, descending.
    """
    cm = _as_cm(cm)
    n = cm.shape[0] // 2
    nus = _two_mode_spectrum(cm) if n == 2 else None
    if nus is None:
        nus = _hermitian_spectrum(cm)
    nus = np.sort(nus)[::-1]
    if validate and nus[-1] < 1.0 - PHYSICAL_TOL:
        raise NonPhysical(f"symplectic eigenvalue {nus[-1]:.12g} < 1")
    return nus


def _is_normal_form(cm):
    n = cm.shape[0] // 2
    d = np.diag(cm)
    off = cm - np.diag(d)
    scale = max(1.0, np.max(np.abs(d)))
    return np.max(np.abs(off)) <= 1e-14 * scale and np.allclose(
        d[0::2], d[1::2], rtol=0, atol=1e-14 * scale
    ), d[0::2]


def williamson(cm):
    """Williamson decomposition ``cm = S (+)_k nu_k 1_2 S^T``.

    Uses the orthogonal normal form of the antisymmetric matrix
    ``cm^{-1/2} Omega cm^{-1/2}``, obtained from the Hermitian eigenproblem of
    ``i cm^{-1/2} Omega cm^{-1/2}`` so that degenerate spectra are handled by
    ``eigh``. Spectra are sorted descending; a CM already in normal form yields
    a mode-permutation matrix (identity when already sorted).

    Raises
    ------
    NonPhysical
        If the CM is not positive definite or a symplectic eigenvalue is < 1.
    NumericalFailure
        If reconstruction or symplecticity residuals exceed ``1e-7`` (relative
        to the CM scale).
    """
    cm = _as_cm(cm)
    n = cm.shape[0] // 2
    omega = symplectic_form(n)

    is_nf, diag_nus = _is_normal_form(cm)
    if is_nf:
        if diag_nus.min() < 1.0 - PHYSICAL_TOL:
            raise NonPhysical(f"symplectic eigenvalue {diag_nus.min():.12g} < 1")
        order = np.argsort(-diag_nus, kind="stable")
        perm = np.zeros((2 * n, 2 * n))
        for new, old in enumerate(order):
            perm[2 * old, 2 * new] = 1.0
            perm[2 * old + 1, 2 * new + 1] = 1.0
        nus = np.clip(diag_nus[order], 1.0, None)
        return WilliamsonDecomposition(perm, nus)

    w, u = np.linalg.eigh(cm)
    if w[0] <= 0:
        raise NonPhysical("covariance matrix is not positive definite")
    sqrt_cm = (u * np.sqrt(w)) @ u.T
    isqrt_cm = (u / np.sqrt(w)) @ u.T
    anti = isqrt_cm @ omega @ isqrt_cm
    anti = 0.5 * (anti - anti.T)
    t, vecs = np.linalg.eigh(1j * anti)
    # positive half, ascending t == descending nu
    t = t[n:]
    vecs = vecs[:, n:]
    k = np.empty((2 * n, 2 * n))
    k[:, 0::2] = math.sqrt(2.0) * vecs.imag
    k[:, 1::2] = math.sqrt(2.0) * vecs.real
    nus = 1.0 / t
    if nus.min() < 1.0 - PHYSICAL_TOL:
        raise NonPhysical(f"symplectic eigenvalue {nus.min():.12g} < 1")
    nus = np.where(nus < 1.0, 1.0, nus)
    s = sqrt_cm @ k @ np.diag(np.repeat(np.sqrt(t), 2))
    dec = WilliamsonDecomposition(s, nus)

    scale = max(1.0, np.max(np.abs(cm)))
    recon = np.max(np.abs(dec.reconstruct() - cm)) / scale
    sympl = np.max(np.abs(s @ omega @ s.T - omega)) / scale
    if recon > 1e-7 or sympl > 1e-7:
        raise NumericalFailure(
            f"Williamson residuals too large (reconstruction {recon:.3g}, symplectic {sympl:.3g})"
        )
    return dec


def _check_gl_args(x, s):
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0 - PHYSICAL_TOL) or np.any(np.isnan(x)):
        raise DomainError("G_s and Lambda_s require x >= 1")
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    return np.maximum(x, 1.0)


def _log_ratio_terms(x, s):
    # r = ((x-1)/(x+1))**s and 1 - r, both without overflow or cancellation
    # x - 1 is exact near 1, where 2 / (x + 1) would round to 1
    with np.errstate(divide="ignore"):
        log_r = s * np.where(x > 3.0, np.log1p(-2.0 / (x + 1.0)), np.log((x - 1.0) / (x + 1.0)))
    one_minus_r = -np.expm1(log_r)
    return np.exp(log_r), one_minus_r


def log_g_func(x, s):
    """Natural log of :func:`g_func`."""
    x = _check_gl_args(x, s)
    _, one_minus_r = _log_ratio_terms(x, s)
    return s * math.log(2.0) - s * np.log1p(x) - np.log(one_minus_r)


def g_func(x, s):
    """``G_s(x) = 2^s / ((x+1)^s - (x-1)^s)``, evaluated in log space.

    Accepts scalars or arrays; ``x >= 1`` and ``0 < s < 1``.
    """
    out = np.exp(log_g_func(x, s))
    return float(out) if np.ndim(out) == 0 else out


def lambda_func(x, s):
    """``Lambda_s(x) = ((x+1)^s + (x-1)^s) / ((x+1)^s - (x-1)^s)``; always >= 1."""
    x = _check_gl_args(x, s)
    r, one_minus_r = _log_ratio_terms(x, s)
    out = (1.0 + r) / one_minus_r
    return float(out) if np.ndim(out) == 0 else out


def _pair(rho0, rho1):
    if rho0.n_modes != rho1.n_modes:
        raise DimensionMismatch(f"mode counts differ: {rho0.n_modes} vs {rho1.n_modes}")


def log_s_overlap(rho0, rho1, s, decompositions=None):
    """Natural log of the s-overlap ``C_s = Tr[rho0^s rho1^(1-s)]``.

    ``C_s = 2^N sqrt(det Pi_s / det Sigma_s) exp(-d^T Sigma_s^{-1} d / 2)`` with
    ``Pi_s = G_s(V0) G_{1-s}(V1)`` and
    ``Sigma_s = S0 Lambda_s(V0) S0^T + S1 Lambda_{1-s}(V1) S1^T`` over the
    Williamson forms, and ``d = x0 - x1``.

    ``decompositions`` may pass precomputed ``(williamson(V0), williamson(V1))``.
    """
    _pair(rho0, rho1)
    if not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    if np.array_equal(rho0.cm, rho1.cm) and np.array_equal(rho0.mean, rho1.mean):
        return 0.0  # Tr[rho^s rho^(1-s)] = Tr rho
    w0, w1 = decompositions or (williamson(rho0.cm), williamson(rho1.cm))
    n = rho0.n_modes
    log_det_pi = 2.0 * (np.sum(log_g_func(w0.spectrum, s)) + np.sum(log_g_func(w1.spectrum, 1.0 - s)))
    sigma = (
        w0.s_matrix @ np.diag(np.repeat(lambda_func(w0.spectrum, s), 2)) @ w0.s_matrix.T
        + w1.s_matrix @ np.diag(np.repeat(lambda_func(w1.spectrum, 1.0 - s), 2)) @ w1.s_matrix.T
    )
    sigma = 0.5 * (sigma + sigma.T)
    try:
        chol = linalg.cho_factor(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalFailure("Sigma_s is not positive definite") from exc
    log_det_sigma = 2.0 * np.sum(np.log(np.diag(chol[0])))
    d = rho0.mean - rho1.mean
    quad = float(d @ linalg.cho_solve(chol, d)) if np.any(d) else 0.0
    log_c = n * math.log(2.0) + 0.5 * (log_det_pi - log_det_sigma) - 0.5 * quad
    if log_c > 1e-9:
        raise NumericalFailure(f"s-overlap exceeds 1 (ln C_s = {log_c:.3g})")
    # determinant ratios of O(1) matrices do not resolve ln C_s below this
    return 0.0 if log_c > -OVERLAP_NOISE else log_c


def s_overlap(rho0, rho1, s):
    """s-overlap ``C_s = Tr[rho0^s rho1^(1-s)]`` in ``(0, 1]``."""
    return math.exp(log_s_overlap(rho0, rho1, s))


class BoundKind(str, enum.Enum):
    QCB = "QCB"
    QBB = "QBB"
    LOWER = "LOWER"
    CLOSED_FORM = "CLOSED_FORM"


@dataclass(frozen=True)
class BoundResult:
    """An error-probability bound, kept in both linear and log form.

    ``log_probability`` is authoritative; ``probability`` underflows to 0 for
    very large ``M``. ``exponent_per_use = -(ln P - ln 1/2) / M``.
    """

    kind: BoundKind
    probability: float
    log_probability: float
    exponent_per_use: float
    s_star: Optional[float] = None

    @classmethod
    def from_log(cls, kind, log_probability, m_probes, s_star=None):
        log_probability = min(float(log_probability), LN_HALF)
        return cls(
            kind=BoundKind(kind),
            probability=math.exp(log_probability),
            log_probability=log_probability,
            exponent_per_use=max(0.0, -(log_probability - LN_HALF) / m_probes),
            s_star=s_star,
        )

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "probability": self.probability,
            "log_probability": self.log_probability,
            "exponent_per_use": self.exponent_per_use,
            "s_star": self.s_star,
        }


def _check_m(m):
    if int(m) != m or m < 1:
        raise DomainError(f"number of probes must be a positive integer, got {m}")
    return int(m)


def minimize_log_overlap(rho0, rho1):
    """Return ``(s_star, ln C_{s_star})`` minimising ``ln C_s`` over ``[1e-6, 1 - 1e-6]``.

    A 21-point grid scan seeds the bracket for a bounded Brent search
    (``xatol = 1e-8``), which guards against non-unimodal ``ln C_s``.
    """
    _pair(rho0, rho1)
    decs = (williamson(rho0.cm), williamson(rho1.cm))
    f = lambda s: log_s_overlap(rho0, rho1, s, decs)  # noqa: E731
    grid = np.linspace(S_MARGIN, 1.0 - S_MARGIN, 21)
    vals = np.array([f(s) for s in grid])
    i = int(np.argmin(vals))
    if vals[i] == 0.0 and np.all(vals == 0.0):
        return 0.5, 0.0
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": S_XTOL})
    if res.fun <= vals[i]:
        return float(res.x), float(res.fun)
    return float(grid[i]), float(vals[i])


def qcb(rho0, rho1, m_probes=1):
    """Quantum Chernoff bound ``1/2 (inf_s C_s)^M``."""
    m = _check_m(m_probes)
    s_star, log_c = minimize_log_overlap(rho0, rho1)
    return BoundResult.from_log(BoundKind.QCB, LN_HALF + m * log_c, m, s_star)


def qbb(rho0, rho1, m_probes=1):
    """Quantum Bhattacharyya bound ``1/2 C_{1/2}^M``."""
    m = _check_m(m_probes)
    log_c = log_s_overlap(rho0, rho1, 0.5)
    return BoundResult.from_log(BoundKind.QBB, LN_HALF + m * log_c, m, 0.5)


def log_fidelity_lower_bound(log_overlap_half, m_probes):
    """``ln[1/2 (1 - sqrt(1 - F^(2M)))]`` from ``ln C_{1/2}``.

    Uses ``1 - sqrt(1 - y) = y / (1 + sqrt(1 - y))`` with ``y = F^(2M)`` so that
    large ``M`` never evaluates ``1 - (tiny)``.
    """
    log_y = 2.0 * m_probes * log_overlap_half
    return LN_HALF + log_y - math.log1p(math.sqrt(-math.expm1(log_y)))


def lower_bound(rho0, rho1, m_probes=1):
    """Fidelity lower bound ``P_min >= 1/2 (1 - sqrt(1 - Tr[sqrt(rho0) sqrt(rho1)]^(2M)))``."""
    m = _check_m(m_probes)
    log_c = log_s_overlap(rho0, rho1, 0.5)
    return BoundResult.from_log(BoundKind.LOWER, log_fidelity_lower_bound(log_c, m), m, 0.5)
