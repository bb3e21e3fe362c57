import math

import numpy as np
import pytest

from qinla.errors import CertificationFailure, CutoffTooSmall, DomainError, NumericalFailure
from qinla.fock import (
    FockState,
    certify_pipeline,
    coherent_fock,
    nla_fock,
    qi_fock_states,
    quadrature_moments,
    s_overlap_fock,
    thermal_fock,
    thermal_loss_fock,
    tmsv_fock,
)
from qinla.nla import NlaConfig, cs_nla_transform, qi_nla_conditional_states
from qinla.states import QiScenario, qi_conditional_states
from qinla.symplectic import GaussianState, s_overlap

REF = QiScenario(0.1, 0.1, 0.2, 1)


def lam_of(ns):
    return math.sqrt(ns / (ns + 1))


def assert_density_matrix(state, tol=1e-10):
    m = state.matrix
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(m).min() > -tol
    assert np.trace(m).real == pytest.approx(1.0, abs=1e-12)


class TestSources:
    def test_vacuum_tmsv(self):
        st = tmsv_fock(0.0, 6)
        expected = np.zeros((36, 36))
        expected[0, 0] = 1.0
        np.testing.assert_array_equal(st.matrix, expected)

    def test_tail(self):
        st = tmsv_fock(math.sqrt(0.5), 40)
        assert st.trace_deficit < 1e-11
        assert st.trace_deficit == pytest.approx(0.5**40, rel=1e-3, abs=1e-15)

    def test_too_small(self):
        with pytest.raises(CutoffTooSmall):
            tmsv_fock(math.sqrt(0.5), 10)

    def test_marginal_is_thermal(self):
        ns = 0.3
        st = tmsv_fock(lam_of(ns), 40)
        q = ns / (ns + 1)
        np.testing.assert_allclose(st.photon_distribution(0), (1 - q) * q ** np.arange(40), atol=1e-12)
        np.testing.assert_allclose(st.reduced(1), np.diag(st.photon_distribution(1)), atol=1e-14)

    def test_tmsv_moments(self):
        mean, cm = quadrature_moments(tmsv_fock(lam_of(0.2), 30))
        from qinla.states import tmsv_cm

        np.testing.assert_allclose(mean, 0.0, atol=1e-12)
        np.testing.assert_allclose(cm, tmsv_cm(0.2).cm, atol=1e-8)


class TestLoss:
    def test_unit_transmission(self):
        st = tmsv_fock(lam_of(0.1), 20)
        out = thermal_loss_fock(st, 0, 1.0, 0.3)
        np.testing.assert_allclose(out.matrix, st.matrix, atol=1e-12)

    def test_vacuum_replacement(self):
        st = thermal_fock(0.4, 15)
        out = thermal_loss_fock(st, 0, 0.0, 0.0)
        assert out.matrix[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_moments_match_channel_output(self):
        rho0, rho1, _ = qi_fock_states(REF, 1.0, 25)
        for fock, gauss in zip((rho0, rho1), qi_conditional_states(REF)):
            assert_density_matrix(fock)
            mean, cm = quadrature_moments(fock)
            np.testing.assert_allclose(mean, 0.0, atol=1e-12)
            np.testing.assert_allclose(cm, gauss.cm, atol=1e-7)

    def test_domain(self):
        st = thermal_fock(0.1, 8)
        with pytest.raises(DomainError):
            thermal_loss_fock(st, 0, 1.5, 0.1)
        with pytest.raises(DomainError):
            thermal_loss_fock(st, 0, 0.5, 0.1, cutoff=9)

    def test_unresolved_environment(self):
        with pytest.raises(CutoffTooSmall):
            thermal_loss_fock(thermal_fock(0.0, 5), 0, 0.5, 5.0)


class TestNla:
    def test_unit_gain(self):
        st = tmsv_fock(lam_of(0.1), 15)
        out, weight = nla_fock(st, 0, 1.0)
        np.testing.assert_allclose(out.matrix, st.matrix, atol=1e-15)
        assert weight == pytest.approx(1.0, abs=1e-14)

    def test_coherent_state_amplified(self):
        out, _ = nla_fock(coherent_fock(0.3, 40), 0, 1.5)
        target = coherent_fock(0.45, 40).matrix
        fidelity = np.real(np.trace(out.matrix @ target))
        assert fidelity >= 1 - 1e-8

    @pytest.mark.parametrize("alpha,g", [(0.3, 1.5), (0.5, 2.0), (0.2 + 0.1j, 1.8)])
    def test_coherent_success_weight(self, alpha, g):
        _, weight = nla_fock(coherent_fock(alpha, 40), 0, g)
        assert weight == pytest.approx(math.exp(abs(alpha) ** 2 * (g * g - 1)), rel=1e-8)

    def test_thermal_amplified(self):
        out, _ = nla_fock(thermal_fock(0.1, 40), 0, 1.5)
        mean, cm = quadrature_moments(out)
        n_out = (cm[0, 0] - 1) / 2
        assert n_out == pytest.approx(0.25714, abs=1e-5)
        assert n_out == pytest.approx((cs_nla_transform(0.0, 0.1, 1.5)[1] - 1) / 2, rel=1e-8)

    def test_tail_check(self):
        with pytest.raises(CutoffTooSmall):
            nla_fock(thermal_fock(0.3, 10), 0, 2.0)


class TestOverlap:
    def test_identical(self):
        st = tmsv_fock(lam_of(0.1), 10)
        assert s_overlap_fock(st, st, 0.4) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("s", [0.2, 0.5, 0.8])
    def test_thermal_pair(self, s):
        c = s_overlap_fock(thermal_fock(0.1, 60), thermal_fock(0.3, 60), s)
        assert c == pytest.approx(s_overlap(GaussianState.thermal(0.1), GaussianState.thermal(0.3), s), rel=1e-8)

    def test_coherent_pair(self):
        c = s_overlap_fock(coherent_fock(0.0, 40), coherent_fock(1.0, 40), 0.5)
        assert c == pytest.approx(math.exp(-1.0), rel=1e-10)

    def test_non_hermitian(self):
        m = np.eye(3) / 3
        m[0, 1] = 0.1
        with pytest.raises(NumericalFailure):
            s_overlap_fock(FockState(m, 3, 1), FockState(np.eye(3) / 3, 3, 1), 0.5)


class TestPipeline:
    def test_amplified_moments(self):
        rho0, rho1, _ = qi_fock_states(REF, 1.5, 25)
        for fock, gauss in zip((rho0, rho1), qi_nla_conditional_states(REF, NlaConfig(1.5))):
            assert_density_matrix(fock)
            _, cm = quadrature_moments(fock)
            np.testing.assert_allclose(cm, gauss.cm, atol=1e-6)

    def test_reference_overlap(self):
        rho0, rho1, _ = qi_fock_states(REF, 1.5, 25)
        c_fock = s_overlap_fock(rho0, rho1, 0.5)
        c_gauss = s_overlap(*qi_nla_conditional_states(REF, NlaConfig(1.5)), 0.5)
        assert c_gauss == pytest.approx(c_fock, rel=1e-6)

    def test_cutoff_stable(self):
        sc = QiScenario(0.05, 0.05, 0.2)
        small = qi_fock_states(sc, 1.3, 14)
        large = qi_fock_states(sc, 1.3, 28)
        for s in (0.3, 0.5, 0.7):
            a = s_overlap_fock(small[0], small[1], s)
            b = s_overlap_fock(large[0], large[1], s)
            assert abs(a - b) < 1e-8

    def test_certify_unit_gain(self):
        report = certify_pipeline(REF, NlaConfig(1.0), cutoff=25)
        assert report.certified and report.max_rel_deviation < 1e-7

    @pytest.mark.slow
    def test_certify_gain(self):
        report = certify_pipeline(REF, NlaConfig(1.5), cutoff=35)
        assert report.max_rel_deviation < 1e-5
        assert report.trace_deficits["h1"] < 1e-8

    def test_no_signal(self):
        report = certify_pipeline(REF.replace(n_s=0.0), 1.5, cutoff=20)
        np.testing.assert_allclose(report.oracle, 1.0, atol=1e-12)
        np.testing.assert_allclose(report.gaussian, 1.0, atol=1e-12)

    def test_failure_carries_report(self):
        with pytest.raises(CertificationFailure) as info:
            certify_pipeline(REF, 1.5, cutoff=25, tol=1e-12)
        assert info.value.report is not None
        assert info.value.report.max_rel_deviation > 1e-12

    def test_low_cutoff(self):
        with pytest.raises(CutoffTooSmall):
            certify_pipeline(REF, 1.5, cutoff=6)

    def test_oracle_limits(self):
        with pytest.raises(DomainError):
            certify_pipeline(REF.replace(n_s=0.5), 1.5)
