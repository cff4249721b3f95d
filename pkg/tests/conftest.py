import numpy as np
import pytest

from fabricsim import bundled_overlay, load_overlay
from fabricsim.corpus import synthetic_image


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::", 1)[1]
        if report.passed:
            print(f"\nACCEPTANCE PASS: {name}")
        elif report.failed:
            print(f"\nACCEPTANCE FAIL: {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def corpus_images():
    """Three deterministic 1024x768 corpus frames."""
    return [synthetic_image(seed=s) for s in (1, 2, 3)]


@pytest.fixture
def edge_overlay():
    return load_overlay(bundled_overlay("edge_detect"))


@pytest.fixture
def loopback_overlay():
    return load_overlay(bundled_overlay("loopback"))
