"""Nakano, dual-Nakano and Griffiths positivity tests, and the Schur complement.

Nakano and dual-Nakano positivity are Hermitian eigenproblems on ``C^n (x) C^r``
and are decided exactly (up to the eigensolver).  Griffiths positivity asks for
the minimum of a biquadratic form over a product of spheres, which is not a
single eigenproblem once ``n, r >= 2``; it is attacked by alternating exact
eigen-steps from many starts and the verdict says so in ``method``.

Tolerances are relative: a verdict stores ``tolerance * scale`` where
``scale`` is the largest absolute eigenvalue of the relevant Hermitian matrix
(the Nakano matrix in the Griffiths case, which bounds the biquadratic form).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .curvature import CurvatureTensor

log = logging.getLogger(__name__)

__all__ = [
    "Classification",
    "Method",
    "Verdict",
    "BlockMatrix",
    "CertificationError",
    "classify",
    "nakano_test",
    "dual_nakano_test",
    "griffiths_test",
    "schur_complement",
    "DEFAULT_TOLERANCE",
]

DEFAULT_TOLERANCE = 1e-9
DEGENERACY_TOL = 1e-10
SWEEP_DECREASE_TOL = 1e-12


class CertificationError(RuntimeError):
    """The eigensolver failed; no verdict can be issued."""


class Classification(str, Enum):
    POSITIVE = "positive"
    SEMI_POSITIVE = "semi_positive"
    INDEFINITE = "indefinite"
    SEMI_NEGATIVE = "semi_negative"
    NEGATIVE = "negative"


class Method(str, Enum):
    EXACT_EIGEN = "exact_eigen"
    MULTISTART_HEURISTIC = "multistart_heuristic"


def classify(margin: float, max_value: float, tol: float) -> Classification:
    """Sign pattern of a form with minimum ``margin`` and maximum ``max_value``.

    The identically zero form (both within ``tol``) is reported as
    ``semi_positive``.
    """
    if margin > tol:
        return Classification.POSITIVE
    if max_value < -tol:
        return Classification.NEGATIVE
    if margin >= -tol:
        return Classification.SEMI_POSITIVE
    if max_value <= tol:
        return Classification.SEMI_NEGATIVE
    return Classification.INDEFINITE


@dataclass(frozen=True, eq=False)
class Verdict:
    classification: Classification
    margin: float
    witness: np.ndarray
    method: Method
    tolerance: float
    max_value: float
    starts_used: int = 0
    converged: bool = True
    spectrum: Optional[np.ndarray] = None
    witness_factors: Optional[tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def is_positive(self) -> bool:
        return self.classification is Classification.POSITIVE

    @property
    def inconclusive(self) -> bool:
        """Heuristic run where no start met the convergence criterion."""
        return self.method is Method.MULTISTART_HEURISTIC and not self.converged

    def kernel_dim(self) -> int:
        """Number of eigenvalues within tolerance of zero (exact verdicts only)."""
        if self.spectrum is None:
            raise ValueError("no spectrum recorded for a heuristic verdict")
        return int(np.count_nonzero(np.abs(self.spectrum) <= self.tolerance))


def _fix_phase(x: np.ndarray) -> np.ndarray:
    """Rotate so the largest-modulus entry is real positive (first one on ties)."""
    flat = x.reshape(-1)
    k = int(np.argmax(np.abs(flat) > np.max(np.abs(flat)) * (1 - 1e-9)))
    z = flat[k]
    if z == 0:
        return x
    return x * (abs(z) / z)


def _eigh(M: np.ndarray):
    try:
        return np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise CertificationError(f"Hermitian eigensolver did not converge: {exc}") from exc


def _exact_verdict(M: np.ndarray, shape: tuple[int, int], tolerance: float) -> Verdict:
    w, V = _eigh(M)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    tol = tolerance * scale
    witness = _fix_phase(np.conj(V[:, 0])).reshape(shape)
    return Verdict(
        classification=classify(float(w[0]), float(w[-1]), tol),
        margin=float(w[0]),
        witness=witness,
        method=Method.EXACT_EIGEN,
        tolerance=tol,
        max_value=float(w[-1]),
        spectrum=w,
    )


def nakano_test(R: CurvatureTensor, tolerance: float = DEFAULT_TOLERANCE) -> Verdict:
    """Minimum of ``sum R[i,j,a,b] u[i,a] conj(u[j,b])`` over unit ``u``.

    The witness ``u`` has shape ``(n, r)``; ``R.nakano_form(witness)``
    reproduces the margin.
    """
    return _exact_verdict(R.nakano_matrix(), (R.base_dim, R.rank), tolerance)


def dual_nakano_test(R: CurvatureTensor, tolerance: float = DEFAULT_TOLERANCE) -> Verdict:
    """Minimum of ``sum R[i,j,a,b] u[i,b] conj(u[j,a])`` over unit ``u``."""
    return _exact_verdict(R.dual_nakano_matrix(), (R.base_dim, R.rank), tolerance)


def _min_eigvec(H: np.ndarray, prev: Optional[np.ndarray]) -> tuple[float, np.ndarray]:
    """Smallest eigenpair of ``H``; on degeneracy, the eigenvector closest to ``prev``."""
    w, V = _eigh(H)
    x = V[:, 0]
    if prev is not None:
        deg = np.abs(w - w[0]) <= DEGENERACY_TOL * max(1.0, float(np.max(np.abs(w))))
        if np.count_nonzero(deg) > 1:
            Q = V[:, deg]
            proj = Q @ (Q.conj().T @ prev)
            nrm = np.linalg.norm(proj)
            if nrm > 1e-8:
                x = proj / nrm
    return float(w[0]), x


def _alternate(Rv: np.ndarray, u: np.ndarray, v: np.ndarray, max_iters: int):
    """Alternating minimization of the biquadratic form from ``(u, v)``.

    Iterates live in the conjugated coordinates ``x = conj(u)``, ``y = conj(v)``
    so each half-step is a plain ``x^H H x`` eigenproblem.
    """
    x, y = np.conj(u), np.conj(v)
    value = np.inf
    for it in range(1, max_iters + 1):
        # fix v: H_u[i, j] = sum R[i,j,a,b] v[a] conj(v[b])
        Hu = np.einsum("ijab,a,b->ij", Rv, np.conj(y), y)
        _, x = _min_eigvec(0.5 * (Hu + Hu.conj().T), x)
        Hv = np.einsum("ijab,i,j->ab", Rv, np.conj(x), x)
        new_value, y = _min_eigvec(0.5 * (Hv + Hv.conj().T), y)
        if value - new_value < SWEEP_DECREASE_TOL:
            return new_value, np.conj(x), np.conj(y), True, it
        value = new_value
    return value, np.conj(x), np.conj(y), False, max_iters


def _start_points(n: int, r: int, starts: int, seed: int):
    for i in range(n):
        for a in range(r):
            u = np.zeros(n, dtype=np.complex128)
            v = np.zeros(r, dtype=np.complex128)
            u[i] = 1.0
            v[a] = 1.0
            yield u, v
    rng = np.random.default_rng(seed)
    for _ in range(starts):
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(r) + 1j * rng.standard_normal(r)
        yield u / np.linalg.norm(u), v / np.linalg.norm(v)


def griffiths_test(
    R: CurvatureTensor,
    tolerance: float = DEFAULT_TOLERANCE,
    starts: int = 16,
    max_iters: int = 200,
    seed: int = 0,
) -> Verdict:
    """Minimize ``sum R[i,j,a,b] u[i] conj(u[j]) v[a] conj(v[b])`` over ``|u| = |v| = 1``.

    For ``n == 1`` or ``r == 1`` this is one Hermitian eigenproblem and the
    result is exact.  Otherwise runs alternating eigen-steps from every
    coordinate pair ``(e_i, e_a)`` and from ``starts`` seeded random points;
    the best value found is an upper bound on the true minimum.

    The witness is ``outer(u, v)``, a unit vector in the Nakano domain, so
    ``R.nakano_form(witness)`` reproduces the margin; ``witness_factors``
    holds ``(u, v)``.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    n, r = R.base_dim, R.rank
    scale = float(np.max(np.abs(_eigh(R.nakano_matrix())[0])))
    tol = tolerance * scale

    if n == 1 or r == 1:
        if r == 1:
            H = R.values[:, :, 0, 0]
        else:
            H = R.values[0, 0]
        w, V = _eigh(H)
        z = _fix_phase(np.conj(V[:, 0]))
        u, v = (z, np.ones(1, complex)) if r == 1 else (np.ones(1, complex), z)
        return Verdict(
            classification=classify(float(w[0]), float(w[-1]), tol),
            margin=float(w[0]),
            witness=np.outer(u, v),
            method=Method.EXACT_EIGEN,
            tolerance=tol,
            max_value=float(w[-1]),
            spectrum=w,
            witness_factors=(u, v),
        )

    best = None
    any_converged = False
    used = 0
    for u0, v0 in _start_points(n, r, starts, seed):
        value, u, v, ok, _ = _alternate(R.values, u0, v0, max_iters)
        used += 1
        any_converged |= ok
        if best is None or value < best[0]:
            best = (value, u, v)
    if not any_converged:
        log.warning("griffiths_test: no start converged within %d iterations", max_iters)
    value, u, v = best
    u = _fix_phase(u)
    v = _fix_phase(v)
    margin = R.griffiths_form(u, v)
    # the largest Nakano eigenvalue bounds the biquadratic form from above
    upper = float(_eigh(R.nakano_matrix())[0][-1])
    return Verdict(
        classification=classify(margin, upper, tol),
        margin=margin,
        witness=np.outer(u, v),
        method=Method.MULTISTART_HEURISTIC,
        tolerance=tol,
        max_value=upper,
        starts_used=used,
        converged=any_converged,
        witness_factors=(u, v),
    )


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """``T = [[A, B], [C, D]]`` with square diagonal blocks."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A, B, C, D = (np.atleast_2d(np.asarray(x, dtype=np.complex128)) for x in (self.A, self.B, self.C, self.D))
        p, q = A.shape[0], D.shape[0]
        if A.shape != (p, p) or D.shape != (q, q) or B.shape != (p, q) or C.shape != (q, p):
            raise ValueError(
                f"inconsistent block shapes A{A.shape} B{B.shape} C{C.shape} D{D.shape}"
            )
        for name, x in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, x)

    @classmethod
    def split(cls, T: np.ndarray, p: int) -> "BlockMatrix":
        T = np.asarray(T)
        return cls(T[:p, :p], T[:p, p:], T[p:, :p], T[p:, p:])

    def assembled(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])


def schur_complement(
    T: BlockMatrix, tolerance: float = 1e-12, with_inverse: bool = True
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Return ``A - B D^{-1} C`` and, optionally, ``T^{-1}`` assembled blockwise.

    With ``S = A - B D^{-1} C``:

        T^{-1} = [[ S^{-1},            -S^{-1} B D^{-1}                ],
                  [ -D^{-1} C S^{-1},   D^{-1} C S^{-1} B D^{-1} + D^{-1} ]]
    """
    A, B, C, D = T.A, T.B, T.C, T.D
    sv = np.linalg.svd(D, compute_uv=False)
    if sv[-1] <= tolerance * max(1.0, sv[0]):
        raise np.linalg.LinAlgError(f"D block is singular (smallest singular value {sv[-1]:.3e})")
    Dinv = np.linalg.inv(D)
    S = A - B @ Dinv @ C
    if not with_inverse:
        return S, None
    ss = np.linalg.svd(S, compute_uv=False)
    if ss[-1] <= tolerance * max(1.0, ss[0]):
        raise np.linalg.LinAlgError("T is singular (Schur complement is singular)")
    Sinv = np.linalg.inv(S)
    top = np.hstack([Sinv, -Sinv @ B @ Dinv])
    bottom = np.hstack([-Dinv @ C @ Sinv, Dinv @ C @ Sinv @ B @ Dinv + Dinv])
    return S, np.vstack([top, bottom])
