import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uqcal.binning import (
    EQUAL_COUNT_BY_SIGMA,
    partition_equal_count_by_sigma,
    partition_equal_width_by_variance,
)


def as_sets(partition):
    return [set(b.tolist()) for b in partition.bins]


def brute_force_split(values, n_bins):
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    n = len(values)
    sizes = [n // n_bins + (1 if j < n % n_bins else 0) for j in range(n_bins)]
    out, start = [], 0
    for s in sizes:
        out.append(set(order[start:start + s]))
        start += s
    return out


def test_equal_count_examples():
    assert as_sets(partition_equal_count_by_sigma([3, 1, 2], 1)) == [{0, 1, 2}]
    assert as_sets(partition_equal_count_by_sigma([4, 1, 3, 2], 2)) == [{1, 3}, {0, 2}]
    sizes = partition_equal_count_by_sigma(np.arange(10.0), 3).sizes
    assert sizes.tolist() == [4, 3, 3]
    assert partition_equal_count_by_sigma([1.0], 1).strategy == EQUAL_COUNT_BY_SIGMA


def test_equal_count_ties_are_stable():
    p = partition_equal_count_by_sigma([1.0, 1.0, 1.0, 1.0], 2)
    assert as_sets(p) == [{0, 1}, {2, 3}]


def test_equal_count_errors():
    with pytest.raises(ValueError):
        partition_equal_count_by_sigma([1.0, 2.0], 3)
    with pytest.raises(ValueError):
        partition_equal_count_by_sigma([1.0, 2.0], 0)


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=60), st.integers(1, 12))
def test_equal_count_matches_brute_force(values, n_bins):
    if n_bins > len(values):
        return
    p = partition_equal_count_by_sigma(values, n_bins)
    assert as_sets(p) == brute_force_split(values, n_bins)
    assert p.sizes.max() - p.sizes.min() <= 1
    assert p.n_samples == len(values)


@given(st.lists(st.floats(0.01, 100), min_size=2, max_size=40, unique=True), st.integers(1, 8), st.randoms())
def test_equal_count_permutation_covariant(values, n_bins, rnd):
    if n_bins > len(values):
        return
    perm = list(range(len(values)))
    rnd.shuffle(perm)
    permuted = [values[i] for i in perm]
    original = as_sets(partition_equal_count_by_sigma(values, n_bins))
    moved = as_sets(partition_equal_count_by_sigma(permuted, n_bins))
    assert [{perm[i] for i in b} for b in moved] == original


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=40), st.integers(1, 8))
def test_equal_count_rank_only(values, n_bins):
    if n_bins > len(values):
        return
    a = as_sets(partition_equal_count_by_sigma(values, n_bins))
    b = as_sets(partition_equal_count_by_sigma(np.log(values) * 3 + 1, n_bins))
    assert a == b


def test_equal_width_examples():
    p = partition_equal_width_by_variance([1.0, 1.0, 1.0], 5)
    assert p.n_bins == 1 and as_sets(p) == [{0, 1, 2}]
    assert as_sets(partition_equal_width_by_variance([0.1, 0.9], 2)) == [{0}, {1}]
    assert as_sets(partition_equal_width_by_variance([0.1, 0.2, 0.9], 2)) == [{0, 1}, {2}]


def test_equal_width_drops_empty_bins():
    p = partition_equal_width_by_variance([0.0, 0.05, 1.0], 10)
    assert p.n_bins == 2
    assert as_sets(p) == [{0, 1}, {2}]


@given(st.lists(st.floats(0.0, 1e3), min_size=1, max_size=60), st.integers(1, 15))
def test_equal_width_partition_invariants(values, n_bins):
    p = partition_equal_width_by_variance(values, n_bins)
    members = np.concatenate(p.bins)
    assert sorted(members.tolist()) == list(range(len(values)))
    assert all(b.size > 0 for b in p.bins)
    assert p.n_bins <= n_bins
    # bins are ordered by value: every member of bin j is <= every member of bin j+1
    v = np.asarray(values)
    for a, b in zip(p.bins, p.bins[1:]):
        assert v[a].max() <= v[b].min()
