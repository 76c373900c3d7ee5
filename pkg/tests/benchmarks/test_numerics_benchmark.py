"""
Performance benchmarks for the petzlab numerical kernels.

Run with:
    pytest tests/benchmarks/test_numerics_benchmark.py --benchmark-only
    pytest tests/benchmarks/test_numerics_benchmark.py --benchmark-autosave
"""

import numpy as np
import pytest

from petzlab.channels import apply
from petzlab.entropic import rel_entropy
from petzlab.inequalities import InequalityId, run_check, sample_instance
from petzlab.recovery import OptimizerBudget, petz_map
from petzlab.typicality import typical_mass, typical_projector


@pytest.mark.benchmark
class TestRecoveryBenchmarks:
    """Benchmarks for Petz map construction and the witness search."""

    @pytest.mark.parametrize("dim", [2, 4, 8])
    def test_petz_map(self, benchmark, channel_instance, dim):
        _, sigma, N = channel_instance(dim, dim)

        def build_and_apply():
            return apply(petz_map(sigma, N), apply(N, sigma))

        recovered = benchmark(build_and_apply)
        np.testing.assert_allclose(recovered, sigma, atol=1e-8)

    def test_rotated_witness_search(self, benchmark):
        instance = sample_instance(InequalityId.MONO_CHANNEL_ROTATED, "random", [2, 2], seed=5)
        budget = OptimizerBudget(restarts=3, iterations=50)
        report = benchmark(run_check, InequalityId.MONO_CHANNEL_ROTATED, instance, budget, 5)
        assert report.witness is not None


@pytest.mark.benchmark
class TestEntropicBenchmarks:
    """Benchmarks for eigendecomposition-based quantities."""

    @pytest.mark.parametrize("dim", [4, 16, 64])
    def test_rel_entropy(self, benchmark, channel_instance, dim):
        rho, sigma, _ = channel_instance(dim, 2)
        value = benchmark(rel_entropy, rho, sigma)
        assert value.value >= -1e-9


@pytest.mark.benchmark
class TestTypicalityBenchmarks:
    """Benchmarks for the typical projector on both paths."""

    def test_exact_path_n200(self, benchmark, qubit_pair):
        rho, _ = qubit_pair
        tp = benchmark(typical_projector, rho, rho, 0.1, 200, True)
        assert typical_mass(tp, rho) >= 0.95

    def test_dense_path_n10(self, benchmark, qubit_pair):
        rho, sigma = qubit_pair
        tp = benchmark(typical_projector, rho, sigma, 0.2, 10, False)
        assert tp.projector.shape == (1024, 1024)
