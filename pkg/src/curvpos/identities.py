"""Independent evaluations of the symmetric-power curvature, used as cross-checks.

:func:`sym_power_curvature` builds ``S^k E`` from permanents of index
deltas.  The two routines here get at the same object another way:

* :func:`sym2_curvature_explicit` writes out the four-term ``k = 2`` formula
  entry by entry;
* :func:`sym_power_grouped_form` evaluates the Nakano quadratic form of
  ``S^k E`` as a sum of Nakano forms of ``E`` applied to the auxiliary
  vectors ``V[i, a; c_1..c_{k-1}] = sum_s u[i, (c_1..c_{s-1}, a, c_s..)]``.

In the grouped form the coefficients ``u[i, A]`` are set to zero whenever
``A`` is not weakly increasing, the outer sum runs over weakly increasing
``(c_1 <= ... <= c_{k-1})`` and the inner sum over all orderings of it
(``S_{k-1}``, repeats included).  Summing the outer index over *all*
tuples instead overcounts once ``k >= 3``.
"""

from __future__ import annotations

from itertools import combinations_with_replacement, permutations

import numpy as np

from .curvature import CurvatureTensor
from .multiindex import enumerate_sym_indices


def sym2_curvature_explicit(R: CurvatureTensor) -> np.ndarray:
    """``S^2 E`` curvature over pairs ``(a <= c), (b <= d)``:

    ``R_ab d_cd + R_cd d_ab + R_cb d_ad + R_ad d_cb``
    """
    n, r = R.base_dim, R.rank
    basis = enumerate_sym_indices(r, 2)
    m = len(basis)
    Rv = R.values
    out = np.zeros((n, n, m, m), dtype=np.complex128)
    for p, (a, c) in enumerate(basis):
        for q, (b, d) in enumerate(basis):
            a0, c0, b0, d0 = a - 1, c - 1, b - 1, d - 1
            out[:, :, p, q] = (
                Rv[:, :, a0, b0] * (c == d)
                + Rv[:, :, c0, d0] * (a == b)
                + Rv[:, :, c0, b0] * (a == d)
                + Rv[:, :, a0, d0] * (c == b)
            )
    return out


def sym_power_grouped_form(R: CurvatureTensor, k: int, u: np.ndarray) -> float:
    """Nakano form of ``S^k E`` at ``u`` (shape ``(n, dim S^k)``), via ``E``'s form."""
    n, r = R.base_dim, R.rank
    basis = enumerate_sym_indices(r, k)
    u = np.asarray(u).reshape(n, len(basis))
    pos = {A: p for p, A in enumerate(basis)}
    total = 0.0
    for C in combinations_with_replacement(range(1, r + 1), k - 1):
        for sigma in permutations(range(k - 1)):
            Cs = tuple(C[s] for s in sigma)
            V = np.zeros((n, r), dtype=np.complex128)
            for a in range(1, r + 1):
                for s in range(k):
                    p = pos.get(Cs[:s] + (a,) + Cs[s:])
                    if p is not None:
                        V[:, a - 1] += u[:, p]
            total += R.nakano_form(V)
    return total
