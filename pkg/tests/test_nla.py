import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

from qinla.errors import DomainError, GainOutOfRange, PhysicalityViolation
from qinla.nla import (
    NlaConfig,
    cs_nla_conditional_states,
    cs_nla_transform,
    effective_params,
    g_max,
    lambda_upper_bound,
    ns_max,
    qi_nla_conditional_states,
    success_probability,
)
from qinla.states import ChannelParams, QiScenario, channel_output_cm, qi_conditional_states
from qinla.symplectic import symplectic_eigenvalues

REF = QiScenario(0.1, 0.1, 0.2, 1)
G_MAX_REF = g_max(0.2, 1.0)


def tau_g_direct(tau, eps, g):
    h = g * g - 1
    return g * g * tau / (h * tau * (h * (eps - 2) * eps * tau / 4 - eps + 1) + 1)


def physical_points(n, seed):
    """Random (N_B, kappa, g) with N_B < kappa and 1 <= g < g_max."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        kappa = rng.uniform(0.01, 0.99)
        nb = rng.uniform(0.0, 0.999 * kappa)
        gm = g_max(kappa, 2 * nb / kappa)
        top = min(gm, 10.0)
        out.append((nb, kappa, rng.uniform(1.0, top)))
    return out


class TestNlaConfig:
    @pytest.mark.parametrize("g,a,p", [(1, 1, 1.0), (2, 1, 0.25), (2, 2, 0.125)])
    def test_success_probability(self, g, a, p):
        assert success_probability(NlaConfig(g, a)) == pytest.approx(p)
        assert NlaConfig(g, a).success_probability == pytest.approx(p)

    @pytest.mark.parametrize("g,a", [(0.9, 1), (1.5, 0.5), (math.nan, 1), (math.inf, 1)])
    def test_invalid(self, g, a):
        with pytest.raises(DomainError):
            NlaConfig(g, a)


class TestEffectiveParams:
    def test_unit_gain_identity(self):
        p = REF.channel_params()
        e = effective_params(p, 1.0)
        assert (e.lambda_g, e.tau_g, e.epsilon_g) == (p.lam, p.tau, p.epsilon)

    def test_reference_point(self):
        p = REF.channel_params()
        e = effective_params(p, 1.5)
        assert e.epsilon_g == pytest.approx(1.125, rel=1e-12)
        assert e.tau_g == pytest.approx(0.457143, abs=1e-6)
        # (g^2-1)(eps-2)tau - 2 = -2.25 and (g^2-1) eps tau - 2 = -1.75
        assert e.lambda_g == pytest.approx(p.lam * math.sqrt(2.25 / 1.75), rel=1e-12)
        assert e.n_b == pytest.approx(0.225 / 0.875, rel=1e-12)

    @given(st.floats(0.01, 1.0), st.floats(1.0, 5.0), st.floats(0.0, 0.9))
    def test_pure_loss_limit(self, tau, g, lam):
        assume(lam < lambda_upper_bound(tau, 0.0, g))
        e = effective_params(ChannelParams(lam, tau, 0.0), g)
        assert e.epsilon_g == 0.0
        assert e.tau_g == pytest.approx(g * g * tau / ((g * g - 1) * tau + 1), rel=1e-12)
        assert e.lambda_g == pytest.approx(lam * math.sqrt(1 + (g * g - 1) * tau), rel=1e-12)

    def test_g_max_boundary(self):
        p = REF.channel_params()
        e = effective_params(p, G_MAX_REF - 1e-9)
        assert 0 <= e.lambda_g < 1 and 0 <= e.tau_g <= 1 and e.epsilon_g >= 0
        with pytest.raises(PhysicalityViolation) as info:
            effective_params(p, G_MAX_REF + 1e-6)
        assert isinstance(info.value, GainOutOfRange)
        assert info.value.g_max == pytest.approx(G_MAX_REF)

    def test_tau_g_is_one_at_g_max(self):
        assert tau_g_direct(0.2, 1.0, G_MAX_REF) == pytest.approx(1.0, abs=1e-12)

    def test_excess_noise_limit(self):
        with pytest.raises(PhysicalityViolation) as info:
            effective_params(ChannelParams(0.3, 0.2, 2.0), 1.2)
        assert info.value.constraint == "epsilon<2"

    def test_lambda_violation(self):
        g = 2.0
        p = QiScenario(1.01 * ns_max(0.1, 0.2, g), 0.1, 0.2).channel_params()
        with pytest.raises(PhysicalityViolation) as info:
            effective_params(p, g)
        assert info.value.constraint == "lambda_g<1"

    def test_lambda_non_decreasing(self):
        for nb, kappa, g in physical_points(300, 1):
            lam = 0.5 * lambda_upper_bound(kappa, 2 * nb / kappa, g)
            e = effective_params(ChannelParams(min(lam, 0.99), kappa, 2 * nb / kappa), g)
            assert e.lambda_g >= min(lam, 0.99) * (1 - 1e-15)

    def test_cross_route_background(self):
        for nb, kappa, g in physical_points(1000, 2):
            e = effective_params(ChannelParams(0.0, kappa, 2 * nb / kappa), g)
            expected = g * g * nb / (1 + nb * (1 - g * g))
            assert e.n_b == pytest.approx(expected, rel=1e-10, abs=1e-300)


class TestGMax:
    def test_reference(self):
        assert G_MAX_REF == pytest.approx(2.1016, abs=1e-3)

    @pytest.mark.parametrize("tau,eps", [(0.2, 1.0), (0.5, 0.3), (0.9, 1.9), (0.05, 0.01)])
    def test_root_of_tau_g(self, tau, eps):
        # independent route: numerical root of tau_g(g) = 1
        f = lambda g: tau_g_direct(tau, eps, g) - 1.0  # noqa: E731
        grid = np.linspace(1.0 + 1e-9, 50.0, 20000)
        first = next(i for i, g in enumerate(grid) if f(g) > 0)
        root = brentq(f, grid[first - 1], grid[first], xtol=1e-14)
        assert g_max(tau, eps) == pytest.approx(root, rel=1e-9)

    def test_at_least_one(self):
        for tau in np.linspace(0.01, 1.0, 30):
            for eps in np.linspace(0.01, 1.99, 30):
                assert g_max(tau, eps) >= 1.0 - 1e-12

    def test_decreasing_in_tau(self):
        for eps in (0.1, 0.5, 1.0, 1.5, 1.9):
            vals = [g_max(t, eps) for t in np.linspace(0.02, 1.0, 50)]
            assert np.all(np.diff(vals) < 0)

    def test_sentinels(self):
        assert g_max(0.3, 0.0) == math.inf
        for eps in (-0.1, 2.0, 3.0):
            with pytest.raises(DomainError):
                g_max(0.3, eps)


class TestNsMax:
    def test_reference(self):
        assert ns_max(0.1, 0.2, 2.1016) == pytest.approx(0.963, abs=0.01)

    def test_decreasing_in_gain(self):
        vals = [ns_max(0.1, 0.2, g) for g in np.linspace(1.01, G_MAX_REF, 60)]
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize("g", [1.2, 1.5, 2.0, 2.1])
    def test_brackets_lambda_constraint(self, g):
        eps = 2 * 0.1 / 0.2
        top = ns_max(0.1, 0.2, g)
        lam = lambda n: math.sqrt(n / (n + 1))
        # largest admissible lambda, written out independently
        h = g * g - 1
        bound = 1 / math.sqrt((h * (eps - 2) * 0.2 - 2) / (h * eps * 0.2 - 2))
        assert lam(0.999 * top) < bound
        assert lam(1.001 * top) > bound

    def test_errors(self):
        with pytest.raises(DomainError):
            ns_max(0.1, 0.2, 1.0)
        with pytest.raises(DomainError):
            ns_max(1.0, 0.2, 2.0)


class TestConditionalStates:
    def test_unit_gain(self):
        a, b = qi_nla_conditional_states(REF, NlaConfig(1.0))
        c, d = qi_conditional_states(REF)
        np.testing.assert_array_equal(a.cm, c.cm)
        np.testing.assert_array_equal(b.cm, d.cm)

    def test_reference(self):
        rho0, rho1 = qi_nla_conditional_states(REF, NlaConfig(1.5))
        nb_g = 0.225 / 0.875
        assert rho0.cm[0, 0] == pytest.approx(2 * nb_g + 1, rel=1e-12)
        assert rho0.cm[2, 2] == pytest.approx(REF.nu)
        e = effective_params(REF.channel_params(), 1.5)
        np.testing.assert_allclose(rho1.cm, channel_output_cm(e.as_channel()).cm)

    def test_returned_marginals_match(self):
        # without a target the amplified return is the amplified background alone
        rho0, _ = qi_nla_conditional_states(QiScenario(0.0, 0.1, 0.2), NlaConfig(1.7))
        _, omega_g = cs_nla_transform(0.0, 0.1, 1.7)
        assert rho0.cm[0, 0] == pytest.approx(omega_g, rel=1e-12)

    def test_physical_over_figure_grid(self):
        for ns in (0.1, 0.5, 0.9):
            for g in np.linspace(1.0, G_MAX_REF, 21):
                try:
                    pair = qi_nla_conditional_states(REF.replace(n_s=ns), NlaConfig(g))
                except PhysicalityViolation:
                    assert ns > ns_max(0.1, 0.2, g)
                    continue
                for rho in pair:
                    assert symplectic_eigenvalues(rho.cm)[-1] >= 1 - 1e-9


class TestCoherentTransform:
    def test_unit_gain(self):
        assert cs_nla_transform(0.3, 0.2, 1.0) == pytest.approx((0.3, 1.4))

    def test_reference(self):
        beta, omega = cs_nla_transform(0.2, 0.1, 1.5)
        assert beta == pytest.approx(0.342857, abs=1e-6)
        assert omega == pytest.approx(1.51429, abs=1e-5)
        e = effective_params(REF.channel_params(), 1.5)
        assert omega == pytest.approx(2 * e.n_b + 1, rel=1e-12)

    def test_vacuum_background(self):
        assert cs_nla_transform(0.4, 0.0, 3.0) == pytest.approx((1.2, 1.0))

    def test_thermal_limit(self):
        with pytest.raises(PhysicalityViolation):
            cs_nla_transform(0.1, 1.0, 1.5)

    def test_states(self):
        rho0, rho1 = cs_nla_conditional_states(REF, 1.5)
        beta, omega = cs_nla_transform(math.sqrt(0.02), 0.1, 1.5)
        np.testing.assert_allclose(rho1.mean, [2 * beta, 0.0])
        np.testing.assert_allclose(rho0.cm, omega * np.eye(2))
