import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qfock import (
    MarkedPartition,
    RangeError,
    SetPartition,
    SiteGrid,
    build_anyonic_kernel,
    crossing_coeff,
    cumulants_from_moments,
    enumerate_marked,
    enumerate_partitions,
    independence_test,
    marked_crossing_coeff,
    moment_formula,
)
from qfock.partitions import (
    crossing_tensor,
    diagonal_measure,
    mixed_cumulant,
    moments_from_cumulants,
    partition_product,
)

from helpers import crandn, kernel_from_seed, unit
from oracles import double_factorial, set_partitions

TOL = 1e-10

# Bell numbers and partitions without singletons, n = 0..8
BELL = [1, 1, 2, 5, 15, 52, 203, 877, 4140]
NO_SINGLETONS = [1, 0, 1, 1, 4, 11, 41, 162, 715]


def canon(blocks):
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


@pytest.mark.parametrize("n", range(9))
def test_partition_counts(n):
    assert len(enumerate_partitions(n)) == BELL[n]
    assert len(enumerate_partitions(n, "min2")) == NO_SINGLETONS[n]
    pairs = enumerate_partitions(n, "pair")
    assert len(pairs) == (double_factorial(n - 1) if n % 2 == 0 else 0)


@pytest.mark.parametrize("n", range(7))
def test_partitions_match_insertion_oracle(n):
    ours = {canon(p.blocks) for p in enumerate_partitions(n)}
    ref = {canon(p) for p in set_partitions(list(range(n)))}
    assert ours == ref


def test_small_partition_lists():
    assert len(enumerate_partitions(3)) == 5
    pairs = {canon(p.blocks) for p in enumerate_partitions(4, "pair")}
    assert pairs == {((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))}
    assert [p.blocks for p in enumerate_partitions(3, "min2")] == [((0, 1, 2),)]


def test_partition_size_limits():
    with pytest.raises(RangeError):
        enumerate_partitions(9)
    with pytest.raises(RangeError):
        enumerate_marked(7)
    with pytest.raises(ValueError):
        enumerate_partitions(3, "odd")


def test_marked_counts():
    assert len(enumerate_marked(1)) == 1
    assert len(enumerate_marked(2)) == 3
    # every block of size >= 2 carries one of two marks, singletons only +1
    assert len(enumerate_marked(3)) == 9
    for n in range(7):
        expected = sum(2 ** sum(len(b) >= 2 for b in p) for p in set_partitions(list(range(n))))
        assert len(enumerate_marked(n)) == expected


def test_marked_partition_validation():
    p = SetPartition(2, ((0,), (1,)))
    with pytest.raises(ValueError):
        MarkedPartition(p, (-1, 1))
    with pytest.raises(ValueError):
        MarkedPartition(p, (1,))
    with pytest.raises(ValueError):
        SetPartition(3, ((0, 1),))


def test_crossing_coeff_noncrossing_is_one():
    k = build_anyonic_kernel(SiteGrid.uniform(4), unit(0.8))
    V = SetPartition(4, ((0, 3), (1, 2)))
    assert crossing_coeff(k, V, (0, 1, 2, 3)) == 1


def test_crossing_coeff_single_crossing():
    q = unit(0.8)
    k = build_anyonic_kernel(SiteGrid.uniform(4), q)
    V = SetPartition(4, ((0, 2), (1, 3)))
    assert crossing_coeff(k, V, (0, 1, 2, 3)) == pytest.approx(q)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_crossing_coeff_fermion_sign(n):
    k = build_anyonic_kernel(SiteGrid.uniform(n), -1.0)
    idx = tuple(range(n))
    for V in enumerate_partitions(n):
        c = len(V.crossing_pairs())
        assert crossing_coeff(k, V, idx) == pytest.approx((-1) ** c)


def test_crossing_tensor_matches_pointwise(rng):
    k = kernel_from_seed(3, 3)
    for V in enumerate_partitions(4):
        T = np.broadcast_to(crossing_tensor(k, V), (3,) * 4)
        for idx in itertools.product(range(3), repeat=4):
            assert T[idx] == pytest.approx(crossing_coeff(k, V, idx))


def test_marked_crossing_all_plus_is_one():
    k = kernel_from_seed(4, 4)
    V = MarkedPartition(SetPartition(4, ((0, 2), (1, 3))), (1, 1))
    assert marked_crossing_coeff(k, V, (0, 1, 2, 3)) == 1


def test_marked_crossing_six_point_example():
    # blocks {1,6}+, {2,3,5}-, {4}+ in 1-based labels
    k = kernel_from_seed(5, 6)
    V = MarkedPartition(SetPartition(6, ((0, 5), (1, 2, 4), (3,))), (1, -1, 1))
    idx = (0, 1, 2, 3, 4, 5)
    assert marked_crossing_coeff(k, V, idx) == pytest.approx(k.matrix[1, 3])


def test_marked_crossing_nested_minus_blocks():
    k = kernel_from_seed(6, 4)
    V = MarkedPartition(SetPartition(4, ((0, 3), (1, 2))), (-1, -1))
    assert marked_crossing_coeff(k, V, (0, 1, 2, 3)) == 1


def test_moment_formula_odd_gaussian_vanishes(rng):
    k = kernel_from_seed(7, 3)
    for n in (1, 3, 5):
        assert moment_formula(k, 0.0, [rng.normal(size=3) for _ in range(n)]) == 0


def test_moment_formula_pair(rng):
    k = kernel_from_seed(8, 3)
    f, g = crandn(rng, 3), crandn(rng, 3)
    assert moment_formula(k, 0.4, [f, g]) == pytest.approx(np.sum(f * g * k.weights))


def test_moment_formula_alternating_five_word():
    grid = SiteGrid([0.0, 1.0, 2.0], [0.3, 0.5, 0.8])
    k = build_anyonic_kernel(grid, unit(1.3))
    c1, c2 = grid.indicator(0), grid.indicator(2)
    lam = 0.9
    val = moment_formula(k, lam, [c1, c2, c1, c2, c1])
    assert val == pytest.approx(lam * 0.3 * 0.8)


def test_diagonal_measure_and_partition_product():
    k = build_anyonic_kernel(SiteGrid([0.0, 1.0], [0.5, 2.0]), 1j)
    d = diagonal_measure(k, 3, 2.0)
    assert d[0, 0, 0] == 1.0 and d[1, 1, 1] == 4.0 and np.count_nonzero(d) == 2
    V = SetPartition(3, ((0, 2), (1,)))
    a, b = np.arange(4.0).reshape(2, 2), np.array([1.0, 10.0])
    T = partition_product(V, [a, b])
    for i, j, l in itertools.product(range(2), repeat=3):
        assert T[i, j, l] == a[i, l] * b[j]


def test_classical_variance(rng):
    k = build_anyonic_kernel(SiteGrid.uniform(3), 1.0)
    m1 = rng.normal(size=3)
    m2 = rng.normal(size=(3, 3))
    c = cumulants_from_moments(k, {1: m1, 2: m2})
    assert np.allclose(c[2], m2 - np.outer(m1, m1))


@given(st.integers(0, 10**6))
def test_cumulant_round_trip(seed):
    k = kernel_from_seed(seed, 2)
    r = np.random.default_rng(seed)
    cums = {n: crandn(r, *(2,) * n) for n in range(1, 6)}
    back = cumulants_from_moments(k, moments_from_cumulants(k, cums))
    assert max(np.max(np.abs(back[n] - cums[n])) for n in cums) <= 1e-9


def test_mixed_cumulant_contracts_in_order(rng):
    c = rng.normal(size=(2, 3))
    f, g = rng.normal(size=2), rng.normal(size=3)
    assert mixed_cumulant(c, [f, g]) == pytest.approx(f @ c @ g)


def test_independence_test_depth_limit():
    with pytest.raises(RangeError):
        independence_test({}, [], 6)
