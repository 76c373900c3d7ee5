"""
Unit tests for petzlab.typicality

The reference case is rho = sigma = diag(3/4, 1/4), where a string with k
copies of the larger eigenvalue scores 2 - k log2(3) / n bits against a
reference of h(1/4) = 0.811278.
"""
import math

import numpy as np
import pytest
from scipy.stats import binom

from petzlab.errors import DimensionCap, NegativeParameter, ShapeMismatch, SupportViolation
from petzlab.opmath import SpaceShape
from petzlab.states import random_density
from petzlab.typicality import (
    PATH_DENSE,
    PATH_EXACT,
    compositions,
    eigen_groups,
    eigenvalue_shells,
    gentle_measurement_terms,
    hoeffding_bound,
    lift_to_blocks,
    multinomial,
    sandwich,
    type_class_mass,
    typical_mass,
    typical_projector,
)


# --- Combinatorics Tests ---

@pytest.mark.unit
def test_compositions_count():
    assert sorted(compositions(3, 2)) == [(0, 3), (1, 2), (2, 1), (3, 0)]
    assert len(list(compositions(5, 3))) == math.comb(7, 2)


@pytest.mark.unit
def test_multinomial():
    assert multinomial(4, [2, 2]) == 6
    assert multinomial(5, [5]) == 1
    assert multinomial(6, [1, 2, 3]) == 60


@pytest.mark.unit
def test_type_class_mass_sums_to_one():
    probs = [0.5, 0.3, 0.2]
    assert type_class_mass(6, compositions(6, 3), probs) == pytest.approx(1.0)


@pytest.mark.unit
def test_eigen_groups_merge_and_kernel():
    groups = eigen_groups(np.array([0.4, 0.4, 0.2, 0.0]))
    assert [g.multiplicity for g in groups] == [2, 1, 1]
    assert groups[-1].value == 0.0
    assert math.isinf(groups[-1].neg_log2)


# --- Typical Projector Tests ---

@pytest.mark.unit
def test_single_copy_accepts_likely_letter(qubit_diag):
    tp = typical_projector(qubit_diag, qubit_diag, delta=0.5, n=1)
    assert tp.path == PATH_DENSE
    assert typical_mass(tp, qubit_diag) == pytest.approx(0.75)
    assert tp.accepted_string_set() == frozenset({(0,)})


@pytest.mark.unit
def test_exact_path_matches_binomial_window(qubit_diag):
    n, delta = 200, 0.1
    tp = typical_projector(qubit_diag, qubit_diag, delta=delta, n=n)
    assert tp.path == PATH_EXACT
    assert tp.projector is None

    reference = 0.75 * math.log2(0.75) + 0.25 * math.log2(0.25)
    window = [k for k in range(n + 1) if abs(2 - k * math.log2(3) / n + reference) <= delta]
    assert (window[0], window[-1]) == (138, 162)
    assert sorted(counts[0] for counts in tp.accepted_types) == window

    expected = float(sum(binom.pmf(k, n, 0.75) for k in window))
    mass = typical_mass(tp, qubit_diag)
    assert mass == pytest.approx(expected, abs=1e-12)
    assert mass >= 0.95


@pytest.mark.unit
def test_dense_and_exact_paths_agree():
    rho = random_density(2, seed=1).matrix
    sigma = random_density(2, seed=2).matrix
    dense = typical_projector(rho, sigma, delta=0.3, n=5, exact=False)
    exact = typical_projector(rho, sigma, delta=0.3, n=5, exact=True)
    assert dense.path == PATH_DENSE and exact.path == PATH_EXACT
    assert typical_mass(dense, rho) == pytest.approx(typical_mass(exact, rho), abs=1e-10)
    assert dense.accepted_string_set() == exact.accepted_string_set()


@pytest.mark.unit
def test_dense_projector_is_projector():
    rho = random_density(3, seed=3).matrix
    sigma = random_density(3, seed=4).matrix
    P = typical_projector(rho, sigma, delta=0.4, n=2).projector
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P, P.conj().T, atol=1e-12)


@pytest.mark.unit
def test_degenerate_sigma_accepts_everything():
    rho = random_density(2, seed=5).matrix
    tp = typical_projector(rho, np.eye(2) / 2, delta=0.0, n=3)
    assert typical_mass(tp, rho) == pytest.approx(1.0)
    np.testing.assert_allclose(tp.projector, np.eye(8), atol=1e-12)


@pytest.mark.unit
def test_dense_request_above_cap():
    with pytest.raises(DimensionCap):
        typical_projector(np.eye(2) / 2, np.eye(2) / 2, delta=0.1, n=13, exact=False)


@pytest.mark.unit
def test_string_enumeration_above_cap(qubit_diag):
    tp = typical_projector(qubit_diag, qubit_diag, delta=0.1, n=13)
    with pytest.raises(DimensionCap):
        tp.accepted_string_set()


@pytest.mark.unit
def test_support_violation():
    with pytest.raises(SupportViolation):
        typical_projector(np.eye(2) / 2, np.diag([1.0, 0.0]), delta=0.1, n=2)


@pytest.mark.unit
@pytest.mark.parametrize("delta,n", [(-0.1, 2), (0.1, 0)])
def test_invalid_window(qubit_diag, delta, n):
    with pytest.raises(NegativeParameter):
        typical_projector(qubit_diag, qubit_diag, delta=delta, n=n)


@pytest.mark.unit
def test_dimension_mismatch(qubit_diag):
    with pytest.raises(ShapeMismatch):
        typical_projector(np.eye(3) / 3, qubit_diag, delta=0.1, n=2)


@pytest.mark.unit
def test_hoeffding_bound(qubit_diag):
    expected = 2 * math.exp(-2 * 200 * 0.01 / math.log2(3) ** 2)
    assert hoeffding_bound(qubit_diag, qubit_diag, 0.1, 200) == pytest.approx(expected)
    assert expected == pytest.approx(0.407, abs=1e-3)
    assert hoeffding_bound(qubit_diag, np.eye(2) / 2, 0.1, 200) == 0.0


@pytest.mark.unit
def test_atypical_mass_below_hoeffding(qubit_diag):
    tp = typical_projector(qubit_diag, qubit_diag, delta=0.1, n=200)
    assert 1 - typical_mass(tp, qubit_diag) <= hoeffding_bound(qubit_diag, qubit_diag, 0.1, 200)


# --- Eigenvalue Shell Tests ---

@pytest.mark.unit
def test_two_copy_shells(qubit_diag):
    shells = eigenvalue_shells(qubit_diag, 2, qubit_diag, 0.5)
    assert [s.value for s in shells.shells] == pytest.approx([9 / 16, 3 / 16, 1 / 16])
    assert [s.multiplicity for s in shells.shells] == [1, 2, 1]
    assert shells.shell_count == 3
    assert shells.type_bound == 3
    assert shells.window_count == 2
    assert [s.in_window for s in shells.shells] == [True, True, False]


@pytest.mark.unit
def test_shell_projectors_resolve_identity(qubit_diag):
    shells = eigenvalue_shells(qubit_diag, 2, qubit_diag, 0.5)
    total = sum(shells.shell_projector(i) for i in range(shells.shell_count))
    np.testing.assert_allclose(total, np.eye(4), atol=1e-12)
    for i, shell in enumerate(shells.shells):
        assert np.trace(shells.shell_projector(i)).real == pytest.approx(shell.multiplicity)


@pytest.mark.unit
def test_window_projector_matches_typical_projector(qubit_diag):
    shells = eigenvalue_shells(qubit_diag, 3, qubit_diag, 0.5)
    tp = typical_projector(qubit_diag, qubit_diag, delta=0.5, n=3)
    np.testing.assert_allclose(shells.window_projector(), tp.projector, atol=1e-12)


@pytest.mark.unit
def test_kernel_shell_outside_window():
    sigma = np.diag([0.5, 0.5, 0.0])
    rho = np.diag([0.5, 0.5, 0.0])
    shells = eigenvalue_shells(sigma, 2, rho, 1.0)
    zero = [s for s in shells.shells if s.value == 0.0]
    assert len(zero) == 1
    assert not zero[0].in_window
    assert zero[0].multiplicity == 5


# --- Sandwich Tests ---

@pytest.mark.unit
def test_sandwich_with_itself_is_compression(qubit_diag):
    tp = typical_projector(qubit_diag, qubit_diag, delta=0.5, n=2)
    X = random_density(4, seed=6).matrix
    np.testing.assert_allclose(sandwich(X, tp, tp), tp.projector @ X @ tp.projector, atol=1e-12)


@pytest.mark.unit
def test_sandwich_needs_dense_projector(qubit_diag):
    tp = typical_projector(qubit_diag, qubit_diag, delta=0.5, n=2, exact=True)
    with pytest.raises(DimensionCap):
        sandwich(np.eye(4) / 4, tp, tp)


@pytest.mark.unit
def test_lift_to_blocks_interleaves():
    p = np.diag([1.0, 0.0])
    q = np.diag([0.0, 1.0])
    lifted = lift_to_blocks(np.kron(p, q), dim_a=2, dim_b=2, n=2)
    expected = np.kron(np.kron(np.eye(2), p), np.kron(np.eye(2), q))
    np.testing.assert_allclose(lifted, expected)


@pytest.mark.unit
def test_lift_to_blocks_dimension_check():
    with pytest.raises(ShapeMismatch):
        lift_to_blocks(np.eye(3), dim_a=2, dim_b=2, n=1)


@pytest.mark.unit
def test_gentle_measurement_terms_bounds():
    shape = SpaceShape.of(A=2, B=2)
    rho = random_density(4, seed=7).matrix
    sigma = random_density(4, seed=8).matrix
    sandwiched, pi_mass, disturbance = gentle_measurement_terms(rho, sigma, shape, delta=0.5, n=2)
    assert 0.0 <= sandwiched <= 1.0 + 1e-12
    assert 0.0 <= pi_mass <= 1.0 + 1e-12
    assert disturbance >= 0.0
    assert sandwiched >= pi_mass - disturbance - 1e-10
