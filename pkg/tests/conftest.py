import numpy as np
import pytest

from ncsim import experiments
from ncsim.quantum import QuantumState, bell_phi_plus


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def phi_plus() -> QuantumState:
    return bell_phi_plus()


@pytest.fixture(scope="session")
def contexts():
    return experiments.build_contexts()


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    d = tmp_path / "runs"
    monkeypatch.setenv("NCSIM_OUTPUT_DIR", str(d))
    return d


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
