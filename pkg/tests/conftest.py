"""
Shared pytest fixtures for petzlab testing.
"""
import math
import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Repo root and lib/ on the path for petzlab, observability and the CLI module
ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "lib"))

from observability import metrics as metrics_module  # noqa: E402
from petzlab.config import LabConfig, set_config  # noqa: E402
from petzlab.opmath import SpaceShape  # noqa: E402


# --- Configuration Fixtures ---

@pytest.fixture(autouse=True)
def lab_config(monkeypatch):
    """Fresh default configuration for every test, ignoring PETZLAB_* from the shell."""
    for name in list(os.environ):
        if name.startswith("PETZLAB_"):
            monkeypatch.delenv(name, raising=False)
    config = LabConfig()
    set_config(config)
    yield config
    set_config(LabConfig())


@pytest.fixture(autouse=True)
def fresh_metrics(monkeypatch):
    """Isolated in-process metrics registry."""
    monkeypatch.setattr(metrics_module, "_collector", None)
    yield metrics_module.get_metrics_collector()


# --- State Fixtures ---

def ket(*amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex).reshape(-1, 1)
    return v / np.linalg.norm(v)


def projector(v: np.ndarray) -> np.ndarray:
    return v @ v.conj().T


@pytest.fixture
def qubit_diag():
    """diag(3/4, 1/4): entropy h(1/4) bits."""
    return np.diag([0.75, 0.25]).astype(complex)


@pytest.fixture
def bell_state():
    """(|00> + |11>)/sqrt 2 on A, B."""
    return projector(ket(1, 0, 0, 1)), SpaceShape.of(A=2, B=2)


@pytest.fixture
def ghz_state():
    """(|000> + |111>)/sqrt 2 on A, B, C."""
    v = np.zeros(8, dtype=complex)
    v[0] = v[7] = 1
    return projector(ket(*v)), SpaceShape.of(A=2, B=2, C=2)


@pytest.fixture
def rotated_pair():
    """Pure states at angle pi/12: root fidelity cos(pi/12)."""
    theta = math.pi / 12
    return projector(ket(1, 0)), projector(ket(math.cos(theta), math.sin(theta)))


@pytest.fixture
def tiny_budget():
    from petzlab.recovery import OptimizerBudget

    return OptimizerBudget(restarts=2, iterations=5)
