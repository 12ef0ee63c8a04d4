import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from switchsim.errors import DimensionMismatch, TooLarge
from switchsim.matching import (
    brute_force_matching,
    max_weight_matching,
    permutation_table,
    schedule_weight,
)


def test_zero_matrix_ties_break_to_identity():
    res = max_weight_matching(np.zeros((2, 2), dtype=np.int64))
    assert res.weight == 0
    assert res.perm == (0, 1)


def test_two_by_two_diagonal_optimum():
    # brute force over both permutations: 3 + 5 = 8 beats 1 + 2 = 3
    res = max_weight_matching([[3, 1], [2, 5]])
    assert res.weight == 8
    assert res.perm == (0, 1)
    assert brute_force_matching([[3, 1], [2, 5]]).weight == 8


def test_all_ones_ties_break_to_identity():
    res = brute_force_matching(np.ones((3, 3), dtype=np.int64))
    assert res.weight == 3
    assert res.perm == (0, 1, 2)
    assert max_weight_matching(np.ones((3, 3), dtype=np.int64)).perm == (0, 1, 2)


def test_brute_force_size_guard():
    with pytest.raises(TooLarge):
        brute_force_matching(np.zeros((9, 9), dtype=np.int64))


def test_schedule_weight_examples():
    q = np.array([[3, 1], [2, 5]])
    assert schedule_weight(q, np.zeros((2, 2))) == 0
    assert schedule_weight(q, [[0, 1], [1, 0]]) == 3
    assert schedule_weight(q, np.eye(2)) == 8
    with pytest.raises(DimensionMismatch):
        schedule_weight(q, np.eye(3))


def test_oracle_equivalence_random_matrices():
    rng = np.random.default_rng(7)
    for _ in range(400):
        n = int(rng.integers(2, 6))
        q = rng.integers(0, 50, size=(n, n)).astype(np.int64)
        a = max_weight_matching(q)
        b = brute_force_matching(q)
        assert a.weight == b.weight
        assert a.perm == b.perm


def test_oracle_equivalence_with_heavy_ties():
    # few distinct values force many optima; tie-breaks must still agree
    rng = np.random.default_rng(11)
    for _ in range(300):
        n = int(rng.integers(2, 6))
        q = rng.integers(0, 3, size=(n, n)).astype(np.int64)
        a = max_weight_matching(q)
        b = brute_force_matching(q)
        assert a.weight == b.weight
        assert a.perm == b.perm


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_optimality_certificate_against_random_permutations(n, seed):
    rng = np.random.default_rng(seed)
    q = rng.integers(0, 10**6, size=(n, n)).astype(np.int64)
    res = max_weight_matching(q)
    assert schedule_weight(q, res.schedule) == res.weight
    for _ in range(10):
        perm = rng.permutation(n)
        w = int(q[np.arange(n), perm].sum())
        assert res.weight >= w


@given(st.integers(2, 5), st.integers(1, 1000), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_scale_equivariance_of_argmax(n, scale, seed):
    rng = np.random.default_rng(seed)
    q = rng.integers(0, 100, size=(n, n)).astype(np.int64)
    assert max_weight_matching(q).perm == max_weight_matching(q * scale).perm


def test_returns_full_permutation_even_with_zero_rows():
    q = np.array([[0, 0, 0], [5, 0, 0], [0, 0, 7]], dtype=np.int64)
    res = max_weight_matching(q)
    assert sorted(res.perm) == [0, 1, 2]
    assert res.schedule.sum() == 3


def test_large_weights_stay_exact():
    # weights near 2^60: any float roundoff would corrupt the comparison
    big = 2**60
    q = np.array([[big, big - 1], [big - 1, big]], dtype=np.int64)
    res = max_weight_matching(q)
    assert res.weight == 2 * big
    assert res.perm == (0, 1)


def test_permutation_table_matches_enumeration_order():
    table, perms = permutation_table(3)
    assert table.shape == (6, 9)
    assert perms[0] == (0, 1, 2)
    q = np.array([[3, 1, 0], [2, 5, 0], [0, 0, 4]], dtype=np.int64)
    weights = table @ q.ravel()
    k = int(weights.argmax())
    assert perms[k] == max_weight_matching(q).perm
    assert int(weights[k]) == max_weight_matching(q).weight
    with pytest.raises(TooLarge):
        permutation_table(9)
