import math
from itertools import permutations, product

import pytest
from hypothesis import given, strategies as st

from curvpos.multiindex import (
    enumerate_sym_indices,
    generalized_delta,
    permanent_delta_bruteforce,
    sym_dimension,
    validate_sym_index,
)


def brute_sym_indices(r, k):
    return sorted({tuple(sorted(t)) for t in product(range(1, r + 1), repeat=k)})


def test_degree_zero():
    assert enumerate_sym_indices(2, 0) == [()]


def test_rank2_degree2():
    out = enumerate_sym_indices(2, 2)
    assert out == [(1, 1), (1, 2), (2, 2)]
    assert len(out) == math.comb(3, 2)


@pytest.mark.parametrize("r,k", [(1, 3), (3, 3), (4, 2), (2, 5), (4, 4)])
def test_enumeration_matches_bruteforce(r, k):
    out = enumerate_sym_indices(r, k)
    assert out == brute_sym_indices(r, k)
    assert len(out) == sym_dimension(r, k)


def test_r3_k3_has_ten():
    assert len(enumerate_sym_indices(3, 3)) == 10


def test_rank_zero_rejected():
    with pytest.raises(ValueError):
        enumerate_sym_indices(0, 2)


def test_validate_sym_index():
    assert validate_sym_index([1, 1, 3], 3) == (1, 1, 3)
    with pytest.raises(ValueError):
        validate_sym_index([2, 1])
    with pytest.raises(ValueError):
        validate_sym_index([1, 4], 3)


@pytest.mark.parametrize(
    "A,B,expected",
    [
        ((1, 2), (1, 2), 1),
        ((1, 1), (1, 1), 2),
        ((1, 1, 2), (1, 2, 2), 0),
        ((1, 1, 2), (1, 1, 2), 2),
        ((), (), 1),
    ],
)
def test_generalized_delta_values(A, B, expected):
    assert generalized_delta(A, B) == expected
    assert permanent_delta_bruteforce(A, B) == expected


def test_length_mismatch():
    with pytest.raises(ValueError):
        generalized_delta((1,), (1, 1))


def test_lockstep_reading_differs():
    # sum over sigma of prod delta(a_sigma(j), b_sigma(j)) = k! * prod delta(a_j, b_j)
    A = B = (1, 2)
    lockstep = sum(all(A[s[j]] == B[s[j]] for j in range(2)) for s in permutations(range(2)))
    assert lockstep == 2
    assert generalized_delta(A, B) == 1


def test_exhaustive_symmetry_and_support():
    for r in range(1, 4):
        for k in range(0, 5):
            basis = enumerate_sym_indices(r, k)
            for A in basis:
                for B in basis:
                    d = generalized_delta(A, B)
                    assert d == generalized_delta(B, A)
                    assert (d > 0) == (A == B)


def test_row_sum_distinct_entries():
    for r in range(1, 5):
        for k in range(1, min(r, 4) + 1):
            for A in enumerate_sym_indices(r, k):
                if len(set(A)) != k:
                    continue
                # sum over all ordered tuples B of the permanent is k! for distinct A
                total = sum(permanent_delta_bruteforce(A, B) for B in product(range(1, r + 1), repeat=k))
                assert total == math.factorial(k)
                # over sorted B only the matching multiset contributes
                assert sum(generalized_delta(A, B) for B in enumerate_sym_indices(r, k)) == 1


@given(st.lists(st.integers(1, 4), min_size=0, max_size=6), st.randoms(use_true_random=False))
def test_matches_bruteforce_permanent(entries, rnd):
    A = tuple(entries)
    B = list(entries)
    rnd.shuffle(B)
    if B and rnd.random() < 0.5:
        B[0] = rnd.randint(1, 4)
    assert generalized_delta(A, tuple(B)) == permanent_delta_bruteforce(A, tuple(B))
