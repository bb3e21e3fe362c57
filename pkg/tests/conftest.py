import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qinla.states import QiScenario

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def scenarios(max_ns=2.0, max_nb=1.0, m_max=1000):
    """Random scenarios in the valid parameter box."""
    return st.builds(
        QiScenario,
        n_s=st.floats(0.0, max_ns),
        n_b=st.floats(0.0, max_nb),
        kappa=st.floats(0.01, 0.99),
        m_probes=st.integers(1, m_max),
    )


def random_symplectic(rng, n_modes):
    """Product of random two-mode squeezers, rotations and beamsplitters via expm of a
    Hamiltonian generator ``Omega @ H`` with ``H`` symmetric."""
    from scipy.linalg import expm

    from qinla.symplectic import symplectic_form

    a = rng.normal(size=(2 * n_modes, 2 * n_modes))
    h = 0.5 * (a + a.T)
    return expm(symplectic_form(n_modes) @ h * 0.4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
