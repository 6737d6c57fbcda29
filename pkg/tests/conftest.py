import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from linboltz.cross_sections import MixBounded, MixHardSphere, PolyBounded, PolyHardSphere
from linboltz.gas_models import MixtureSpec, PolyatomicGas

settings.register_profile("default", max_examples=30, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line: ``record_criterion(label, passed, detail)``."""
    def record(label: str, passed: bool, detail: str = ""):
        _ACCEPTANCE.append((label, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")


@pytest.fixture(scope="session")
def gas2():
    return PolyatomicGas(1.0, (0.0, 1.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def gas1():
    return PolyatomicGas(1.0, (0.0,), (1.0,))


@pytest.fixture(scope="session")
def mix12():
    return MixtureSpec((1.0, 2.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def mix41():
    return MixtureSpec((4.0, 1.0), (1.0, 1.0))


@pytest.fixture(scope="session")
def poly_hs():
    return PolyHardSphere(1.0)


@pytest.fixture(scope="session")
def poly_bounded():
    return PolyBounded(1.0, 0.5)


@pytest.fixture(scope="session")
def mix_hs():
    return MixHardSphere(1.0)


@pytest.fixture(scope="session")
def mix_bounded():
    return MixBounded(1.0, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
