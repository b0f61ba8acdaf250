import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jointpricing import RiskSpec, reference_pair  # noqa: E402
from jointpricing.cli import data_path  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ref_pair():
    return reference_pair()


@pytest.fixture
def unit_risk():
    # zeta * gamma = 1, so loadings equal coefficients of variation
    return RiskSpec(0.5, 2.0)


@pytest.fixture
def ref_risk():
    return RiskSpec(0.5, 1.686)


@pytest.fixture
def bundled():
    return data_path


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
