"""
Shared fixtures and configuration for performance benchmarks.
"""

import numpy as np
import pytest

from petzlab.channels import random_channel
from petzlab.states import random_density


# Benchmark configuration
pytest_benchmark_disable_gc = True
pytest_benchmark_warmup = True
pytest_benchmark_warmup_iterations = 3


@pytest.fixture
def channel_instance():
    """Generate a seeded (rho, sigma, N) triple."""
    def _create(dim_in: int = 4, dim_out: int = 4):
        rho = random_density(dim_in, seed=1).matrix
        sigma = random_density(dim_in, seed=2).matrix
        return rho, sigma, random_channel(dim_in, dim_out, seed=3)

    return _create


@pytest.fixture
def qubit_pair():
    return np.diag([0.75, 0.25]).astype(complex), random_density(2, seed=4).matrix
