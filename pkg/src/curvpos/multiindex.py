"""Symmetric multi-indices and the generalized Kronecker delta.

A ``SymIndex`` is a weakly increasing tuple of 1-based fiber indices.  The
set of all of them with length ``k`` over rank ``r`` labels the monomial
basis ``W_{a_1} ... W_{a_k}`` of the k-th symmetric power.

The generalized delta of two multi-indices is the permanent of their
pairwise delta matrix,

    delta(A, B) = sum_{sigma in S_k} prod_j [a_j == b_{sigma(j)}],

which is nonzero exactly when A and B agree as multisets, in which case it
equals the product of the factorials of the multiplicities.  A formula
that permutes both index lists in lockstep would instead give
``k! * prod_j [a_j == b_j]``; that version disagrees with the k = 2
monomial integral ``delta_ab delta_cd + delta_ad delta_bc`` and is not the
one implemented here.
"""

from __future__ import annotations

import math
from collections import Counter
from itertools import combinations_with_replacement, permutations
from typing import Iterable, Sequence

SymIndex = tuple[int, ...]

__all__ = [
    "SymIndex",
    "enumerate_sym_indices",
    "generalized_delta",
    "permanent_delta_bruteforce",
    "validate_sym_index",
    "sym_dimension",
]


def sym_dimension(r: int, k: int) -> int:
    """Number of weakly increasing k-tuples over ``1..r``."""
    return math.comb(r + k - 1, k)


def enumerate_sym_indices(r: int, k: int) -> list[SymIndex]:
    """All weakly increasing k-tuples over ``1..r`` in lexicographic order.

    >>> enumerate_sym_indices(2, 2)
    [(1, 1), (1, 2), (2, 2)]
    """
    if r < 1:
        raise ValueError(f"rank must be >= 1, got {r}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    return list(combinations_with_replacement(range(1, r + 1), k))


def validate_sym_index(A: Iterable[int], r: int | None = None) -> SymIndex:
    A = tuple(int(a) for a in A)
    for a, b in zip(A, A[1:]):
        if a > b:
            raise ValueError(f"multi-index {A} is not weakly increasing")
    if A and A[0] < 1:
        raise ValueError(f"multi-index {A} has entries below 1")
    if r is not None and A and A[-1] > r:
        raise ValueError(f"multi-index {A} has entries above rank {r}")
    return A


def generalized_delta(A: Sequence[int], B: Sequence[int]) -> int:
    """Permanent of the matrix ``M[s][t] = [A[s] == B[t]]``.

    Entries need not be sorted; the value only depends on the multisets.
    """
    if len(A) != len(B):
        raise ValueError(f"length mismatch: {len(A)} != {len(B)}")
    ca, cb = Counter(A), Counter(B)
    if ca != cb:
        return 0
    out = 1
    for m in ca.values():
        out *= math.factorial(m)
    return out


def permanent_delta_bruteforce(A: Sequence[int], B: Sequence[int]) -> int:
    """Reference permanent by explicit summation over ``S_k``."""
    if len(A) != len(B):
        raise ValueError(f"length mismatch: {len(A)} != {len(B)}")
    k = len(A)
    total = 0
    for sigma in permutations(range(k)):
        if all(A[j] == B[sigma[j]] for j in range(k)):
            total += 1
    return total
