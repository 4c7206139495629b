"""Integrals over the projective fiber ``P^{r-1}`` and what is built from them.

Normalization: the Fubini-Study volume form ``omega^{r-1}/(r-1)!`` has total
mass ``1/(r-1)!``, which makes the monomial integrals come out as

    int V_A conj(V_B) / |W|^{2k} = delta(A, B) / (r + k - 1)!

with ``delta`` the generalized Kronecker delta.  Those are computed in exact
rational arithmetic; :func:`monomial_integral_mc` is an independent Monte
Carlo estimate over the unit sphere of ``C^r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .curvature import CurvatureTensor, MetricGram
from .multiindex import SymIndex, enumerate_sym_indices, generalized_delta, validate_sym_index

__all__ = [
    "HomogeneousPoint",
    "MCEstimate",
    "L2Metric",
    "monomial_integral_exact",
    "monomial_integral_mc",
    "monomial_table_mc",
    "l2_induced_metric",
    "l2_constant",
    "demailly_skoda_lhs",
    "demailly_skoda_rhs",
    "demailly_skoda_identity_residual",
    "quotient_horizontal_curvature",
]

MC_BATCH = 50_000


@dataclass(frozen=True, eq=False)
class HomogeneousPoint:
    """Homogeneous coordinates ``[W_1 : ... : W_r]`` on the fiber."""

    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=np.complex128).reshape(-1)
        if W.size == 0 or not np.any(W):
            raise ValueError("homogeneous coordinates must not all vanish")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def normalized(self) -> np.ndarray:
        return self.W / np.linalg.norm(self.W)


@dataclass(frozen=True)
class MCEstimate:
    value: complex
    stderr: float
    samples: int
    seed: int


@dataclass(frozen=True)
class L2Metric:
    """Exact Gram matrix over the monomial basis ``basis``."""

    basis: tuple[SymIndex, ...]
    entries: tuple[tuple[Fraction, ...], ...]

    def as_gram(self) -> MetricGram:
        return MetricGram(np.array([[float(x) for x in row] for row in self.entries]))


def _check_pair(A: Sequence[int], B: Sequence[int], r: int) -> tuple[SymIndex, SymIndex]:
    if r < 1:
        raise ValueError(f"rank must be >= 1, got {r}")
    if len(A) != len(B):
        raise ValueError(f"multi-index lengths differ: {len(A)} != {len(B)}")
    return validate_sym_index(sorted(A), r), validate_sym_index(sorted(B), r)


def monomial_integral_exact(A: Sequence[int], B: Sequence[int], r: int) -> Fraction:
    """``delta(A, B) / (r + k - 1)!`` as an exact rational."""
    A, B = _check_pair(A, B, r)
    return Fraction(generalized_delta(A, B), math.factorial(r + len(A) - 1))


def _sphere_batch(rng: np.random.Generator, size: int, r: int) -> np.ndarray:
    Z = rng.standard_normal((size, r)) + 1j * rng.standard_normal((size, r))
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def monomial_table_mc(r: int, k: int, samples: int, seed: int):
    """MC estimates for all pairs of the degree-k basis over rank r.

    Returns ``(basis, values, stderrs)``.  Samples are drawn in fixed batches
    of ``MC_BATCH`` with seeds spawned from ``seed``, and batch sums are
    combined with ``math.fsum``, so the result depends on ``(samples, seed)``
    only.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    basis = enumerate_sym_indices(r, k)
    m = len(basis)
    idx = np.array(basis, dtype=int).reshape(m, k) - 1
    nbatches = -(-samples // MC_BATCH)
    children = np.random.SeedSequence(seed).spawn(nbatches)
    sums, sq_sums = [], []
    for b, child in enumerate(children):
        size = min(MC_BATCH, samples - b * MC_BATCH)
        W = _sphere_batch(np.random.default_rng(child), size, r)
        V = np.prod(W[:, idx], axis=2) if k else np.ones((size, 1), complex)
        P = np.abs(V) ** 2
        sums.append(V.T @ np.conj(V))
        # |V_A conj(V_B)|^2 = |V_A|^2 |V_B|^2
        sq_sums.append(P.T @ P)
    mean = _fsum_stack(sums) / samples
    second = _fsum_stack(sq_sums).real / samples
    var = np.maximum(second - np.abs(mean) ** 2, 0.0)
    norm = 1.0 / math.factorial(r - 1)
    return basis, mean * norm, np.sqrt(var / samples) * norm


def _fsum_stack(arrs: list[np.ndarray]) -> np.ndarray:
    stack = np.stack(arrs)
    re = np.apply_along_axis(math.fsum, 0, stack.real)
    if np.iscomplexobj(stack):
        return re + 1j * np.apply_along_axis(math.fsum, 0, stack.imag)
    return re


def monomial_integral_mc(
    A: Sequence[int], B: Sequence[int], r: int, samples: int = 100_000, seed: int = 0
) -> MCEstimate:
    """Monte Carlo estimate of the monomial integral.

    Samples ``W`` uniformly on the unit sphere of ``C^r`` (normalized complex
    Gaussians), averages ``V_A(W) conj(V_B(W))`` and scales by ``1/(r-1)!``.
    """
    A, B = _check_pair(A, B, r)
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    k = len(A)
    idxA = np.array(A, dtype=int) - 1
    idxB = np.array(B, dtype=int) - 1
    nbatches = -(-samples // MC_BATCH)
    children = np.random.SeedSequence(seed).spawn(nbatches)
    re, im, sq = [], [], []
    for b, child in enumerate(children):
        size = min(MC_BATCH, samples - b * MC_BATCH)
        W = _sphere_batch(np.random.default_rng(child), size, r)
        if k:
            X = np.prod(W[:, idxA], axis=1) * np.conj(np.prod(W[:, idxB], axis=1))
        else:
            X = np.ones(size, complex)
        re.append(math.fsum(X.real))
        im.append(math.fsum(X.imag))
        sq.append(math.fsum(np.abs(X) ** 2))
    mean = complex(math.fsum(re), math.fsum(im)) / samples
    var = max(math.fsum(sq) / samples - abs(mean) ** 2, 0.0)
    norm = 1.0 / math.factorial(r - 1)
    return MCEstimate(mean * norm, math.sqrt(var / samples) * norm, samples, seed)


def l2_constant(r: int, k: int) -> Fraction:
    """``(r + k)^{r-1} / (r + k - 1)!``."""
    return Fraction((r + k) ** (r - 1), math.factorial(r + k - 1))


def l2_induced_metric(r: int, k: int) -> L2Metric:
    """Fiber-integral metric on ``S^k E`` for the polarization ``(k + r) omega_FS``.

    ``g[A, B] = (k + r)^{r-1} * int V_A conj(V_B) / |W|^{2k}``, computed from
    :func:`monomial_integral_exact`.
    """
    if r < 1 or k < 0:
        raise ValueError(f"need r >= 1 and k >= 0, got r={r}, k={k}")
    basis = tuple(enumerate_sym_indices(r, k))
    factor = (k + r) ** (r - 1)
    entries = tuple(
        tuple(factor * monomial_integral_exact(A, B, r) for B in basis) for A in basis
    )
    return L2Metric(basis, entries)


def demailly_skoda_lhs(R: CurvatureTensor) -> np.ndarray:
    """Curvature of ``E (x) det E``: ``R[i,j,a,b] + d_ab sum_c R[i,j,c,c]``."""
    tr = np.einsum("ijcc->ij", R.values)
    return R.values + np.einsum("ij,ab->ijab", tr, np.eye(R.rank))


def demailly_skoda_rhs(R: CurvatureTensor) -> np.ndarray:
    """``r! * int (W_a conj(W_b)/|W|^2) phi_ij`` with ``phi_ij = (r+1) sum R[i,j,c,d] W_d conj(W_c)/|W|^2``.

    The integrand is expanded into degree-(2, 2) monomials
    ``W_a W_d conj(W_b W_c)`` and each is integrated exactly.
    """
    r = R.rank
    pref = math.factorial(r) * (r + 1)
    out = np.zeros_like(R.values)
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    coef = pref * monomial_integral_exact((a + 1, d + 1), (b + 1, c + 1), r)
                    if coef:
                        out[:, :, a, b] += float(coef) * R.values[:, :, c, d]
    return out


def demailly_skoda_identity_residual(R: CurvatureTensor) -> float:
    """Max entrywise ``|LHS - RHS|`` of the ``E (x) det E`` integral identity."""
    return float(np.max(np.abs(demailly_skoda_lhs(R) - demailly_skoda_rhs(R))))


def quotient_horizontal_curvature(
    R: CurvatureTensor, W, variant: str = "dual_projectivization"
) -> np.ndarray:
    """Horizontal block of the quotient-metric curvature on the projectivized bundle.

    ``dual_projectivization`` (``O_{P(E*)}(1)``)::

        phi[i, j] = sum R[i,j,a,b] W_b conj(W_a) / |W|^2

    ``direct_projectivization`` (``O_{P(E)}(1)``)::

        phi[i, j] = -sum R[i,j,a,b] W_a conj(W_b) / |W|^2
    """
    if not isinstance(W, HomogeneousPoint):
        W = HomogeneousPoint(W)
    if W.W.size != R.rank:
        raise ValueError(f"point has {W.W.size} coordinates, rank is {R.rank}")
    w = W.normalized
    if variant == "dual_projectivization":
        phi = np.einsum("ijab,b,a->ij", R.values, w, np.conj(w))
    elif variant == "direct_projectivization":
        phi = -np.einsum("ijab,a,b->ij", R.values, w, np.conj(w))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return 0.5 * (phi + phi.conj().T)
