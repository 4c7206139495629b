"""Pointwise Chern curvature tensors and bundle constructions.

Every tensor is stored in an orthonormal frame at the point of evaluation,
with the ``sqrt(-1)/2pi`` prefactor of the curvature form stripped, as a
complex array ``R[i, j, a, b]`` (base indices ``i, j``, fiber indices
``a, b``; 0-based in storage).  The curvature symmetry

    R[i, j, a, b] == conj(R[j, i, b, a])

is exactly Hermiticity of the ``nr x nr`` "Nakano matrix"
``M[(i, a), (j, b)] = R[i, j, a, b]``, which is how most of the
constructions below are checked.

The symmetric power is the one place a non-orthonormal frame shows up:
:func:`sym_power_curvature` returns the tensor in the monomial frame along
with that frame's Gram matrix, and :func:`orthonormalize_frame` brings it
back to the orthonormal convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .multiindex import enumerate_sym_indices, generalized_delta

__all__ = [
    "CurvatureTensor",
    "LineCurvature",
    "MetricGram",
    "dual_curvature",
    "tensor_curvature",
    "det_curvature",
    "direct_sum_curvature",
    "twist_by_line",
    "scale_curvature",
    "sym_power_curvature",
    "orthonormalize_frame",
    "hermitian_inverse_sqrt",
    "random_hermitian_curvature",
    "symmetry_defect",
]

SYMMETRY_RTOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def symmetry_defect(values: np.ndarray) -> float:
    """Max of ``|R[i,j,a,b] - conj(R[j,i,b,a])|``."""
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - np.conj(values.transpose(1, 0, 3, 2)))))


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    """Chern curvature ``R[i, j, a, b]`` at a point, orthonormal frame.

    Construction checks shape, finiteness and the curvature symmetry (to a
    relative tolerance of 1e-10); pass ``check=False`` to skip the latter
    for internally produced tensors.
    """

    values: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 4 or v.shape[0] != v.shape[1] or v.shape[2] != v.shape[3]:
            raise ValueError(f"curvature array must have shape (n, n, r, r), got {v.shape}")
        if v.shape[0] < 1 or v.shape[2] < 1:
            raise ValueError(f"base dimension and rank must be >= 1, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("curvature has non-finite entries")
        if self.check:
            scale = max(1.0, float(np.max(np.abs(v))))
            defect = symmetry_defect(v)
            if defect > SYMMETRY_RTOL * scale:
                raise ValueError(f"curvature symmetry violated (defect {defect:.3e})")
        object.__setattr__(self, "values", v)

    @property
    def base_dim(self) -> int:
        return self.values.shape[0]

    @property
    def rank(self) -> int:
        return self.values.shape[2]

    def nakano_matrix(self) -> np.ndarray:
        """``M[(i, a), (j, b)] = R[i, j, a, b]``."""
        n, r = self.base_dim, self.rank
        return self.values.transpose(0, 2, 1, 3).reshape(n * r, n * r)

    def dual_nakano_matrix(self) -> np.ndarray:
        """``N[(i, b), (j, a)] = R[i, j, a, b]``."""
        n, r = self.base_dim, self.rank
        return self.values.transpose(0, 3, 1, 2).reshape(n * r, n * r)

    def nakano_form(self, u: np.ndarray) -> float:
        """``sum R[i,j,a,b] u[i,a] conj(u[j,b])`` for ``u`` of shape (n, r)."""
        u = np.asarray(u).reshape(self.base_dim, self.rank)
        return float(np.einsum("ijab,ia,jb->", self.values, u, np.conj(u)).real)

    def dual_nakano_form(self, u: np.ndarray) -> float:
        """``sum R[i,j,a,b] u[i,b] conj(u[j,a])`` for ``u`` of shape (n, r)."""
        u = np.asarray(u).reshape(self.base_dim, self.rank)
        return float(np.einsum("ijab,ib,ja->", self.values, u, np.conj(u)).real)

    def griffiths_form(self, u: np.ndarray, v: np.ndarray) -> float:
        """``sum R[i,j,a,b] u[i] conj(u[j]) v[a] conj(v[b])``."""
        u = np.asarray(u)
        v = np.asarray(v)
        return float(
            np.einsum("ijab,i,j,a,b->", self.values, u, np.conj(u), v, np.conj(v)).real
        )

    @classmethod
    def from_nakano_matrix(cls, M: np.ndarray, n: int, r: int) -> "CurvatureTensor":
        M = np.asarray(M, dtype=np.complex128)
        if M.shape != (n * r, n * r):
            raise ValueError(f"expected ({n * r}, {n * r}) matrix, got {M.shape}")
        return cls(M.reshape(n, r, n, r).transpose(0, 2, 1, 3))

    @classmethod
    def zeros(cls, n: int, r: int) -> "CurvatureTensor":
        return cls(np.zeros((n, n, r, r), dtype=np.complex128), check=False)

    def allclose(self, other: "CurvatureTensor", atol: float = 1e-12) -> bool:
        return self.values.shape == other.values.shape and bool(
            np.allclose(self.values, other.values, rtol=0.0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class LineCurvature:
    """Curvature ``c[i, j]`` of a line bundle: an n x n Hermitian matrix."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f"line curvature must be a square matrix, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("line curvature has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(v))))
        if np.max(np.abs(v - v.conj().T)) > SYMMETRY_RTOL * scale:
            raise ValueError("line curvature is not Hermitian")
        object.__setattr__(self, "values", v)

    @property
    def base_dim(self) -> int:
        return self.values.shape[0]

    def as_tensor(self) -> CurvatureTensor:
        return CurvatureTensor(self.values[:, :, None, None], check=False)

    @classmethod
    def from_tensor(cls, R: CurvatureTensor) -> "LineCurvature":
        if R.rank != 1:
            raise ValueError(f"expected a rank-1 tensor, got rank {R.rank}")
        return cls(R.values[:, :, 0, 0])


@dataclass(frozen=True, eq=False)
class MetricGram:
    """Hermitian positive-definite Gram matrix of a (possibly non-orthonormal) frame."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"Gram matrix must be square, got {v.shape}")
        if np.max(np.abs(v - v.conj().T), initial=0.0) > SYMMETRY_RTOL * max(
            1.0, float(np.max(np.abs(v), initial=0.0))
        ):
            raise ValueError("Gram matrix is not Hermitian")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def is_identity(self, atol: float = 0.0) -> bool:
        return bool(np.allclose(self.values, np.eye(self.dim), rtol=0.0, atol=atol))


def _require_same_base(R1, R2):
    if R1.base_dim != R2.base_dim:
        raise ValueError(f"base dimension mismatch: {R1.base_dim} != {R2.base_dim}")


def dual_curvature(R: CurvatureTensor) -> CurvatureTensor:
    """Curvature of the dual bundle with the dual metric: ``-R[i, j, b, a]``."""
    return CurvatureTensor(-R.values.transpose(0, 1, 3, 2), check=False)


def scale_curvature(R: CurvatureTensor, factor: float) -> CurvatureTensor:
    return CurvatureTensor(float(factor) * R.values, check=False)


def tensor_curvature(R1: CurvatureTensor, R2: CurvatureTensor) -> CurvatureTensor:
    """Leibniz rule on the lexicographic product basis ``(a, c)``."""
    _require_same_base(R1, R2)
    n, r1, r2 = R1.base_dim, R1.rank, R2.rank
    I1, I2 = np.eye(r1), np.eye(r2)
    out = np.einsum("ijab,cd->ijacbd", R1.values, I2) + np.einsum(
        "ab,ijcd->ijacbd", I1, R2.values
    )
    return CurvatureTensor(out.reshape(n, n, r1 * r2, r1 * r2), check=False)


def det_curvature(R: CurvatureTensor) -> LineCurvature:
    """Fiber trace ``c[i, j] = sum_a R[i, j, a, a]``."""
    return LineCurvature(np.einsum("ijaa->ij", R.values))


def direct_sum_curvature(R1: CurvatureTensor, R2: CurvatureTensor) -> CurvatureTensor:
    _require_same_base(R1, R2)
    n, r1, r2 = R1.base_dim, R1.rank, R2.rank
    out = np.zeros((n, n, r1 + r2, r1 + r2), dtype=np.complex128)
    out[:, :, :r1, :r1] = R1.values
    out[:, :, r1:, r1:] = R2.values
    return CurvatureTensor(out, check=False)


def twist_by_line(R: CurvatureTensor, c: LineCurvature) -> CurvatureTensor:
    """``R[i, j, a, b] + c[i, j] delta_ab``."""
    _require_same_base(R, c)
    out = R.values + np.einsum("ij,ab->ijab", c.values, np.eye(R.rank))
    return CurvatureTensor(out, check=False)


def sym_power_curvature(R: CurvatureTensor, k: int) -> tuple[CurvatureTensor, MetricGram]:
    """Curvature of ``S^k E`` in the monomial frame, plus that frame's Gram.

    For multi-indices ``A, B`` from :func:`enumerate_sym_indices`,

        R[i, j, A, B] = sum_{s, t} R[i, j, A[s], B[t]] * delta(A minus s, B minus t)

    and ``g[A, B] = delta(A, B)``, with ``delta`` the generalized Kronecker
    delta.  ``k = 1`` returns ``R`` and the identity.
    """
    if k < 1:
        raise ValueError(f"symmetric power degree must be >= 1, got {k}")
    n, r = R.base_dim, R.rank
    basis = enumerate_sym_indices(r, k)
    m = len(basis)
    out = np.zeros((n, n, m, m), dtype=np.complex128)
    gram = np.zeros((m, m))
    for p, A in enumerate(basis):
        for q, B in enumerate(basis):
            gram[p, q] = generalized_delta(A, B)
            acc = np.zeros((n, n), dtype=np.complex128)
            for s in range(k):
                As = A[:s] + A[s + 1:]
                for t in range(k):
                    d = generalized_delta(As, B[:t] + B[t + 1:])
                    if d:
                        acc += d * R.values[:, :, A[s] - 1, B[t] - 1]
            out[:, :, p, q] = acc
    return CurvatureTensor(out, check=False), MetricGram(gram)


def hermitian_inverse_sqrt(g: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Principal ``g^{-1/2}`` of a Hermitian positive-definite matrix."""
    w, V = np.linalg.eigh(g)
    if w.size and w[0] <= rtol * max(1.0, float(np.max(np.abs(w)))):
        raise ValueError(f"Gram matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    return (V / np.sqrt(w)) @ V.conj().T


def orthonormalize_frame(R: CurvatureTensor, g: MetricGram) -> CurvatureTensor:
    """Re-express ``R`` (given in a frame with Gram ``g``) in an orthonormal frame.

    ``g[a, b] = h(e_a, e_b)`` and ``R[i, j, a, b] = h(Theta_ij e_a, e_b)``.  The
    new frame is ``f_a = sum_c S[c, a] e_c`` with ``S = conj(g^{-1/2})``, so that
    ``S^T g conj(S) = I``, and

        out[i, j, a, b] = sum R[i, j, c, d] S[c, a] conj(S[d, b]).

    For a real Gram matrix (the monomial frames of symmetric powers) the
    conjugation is immaterial.
    """
    if g.dim != R.rank:
        raise ValueError(f"Gram dimension {g.dim} does not match rank {R.rank}")
    S = np.conj(hermitian_inverse_sqrt(g.values))
    out = np.einsum("ijcd,ca,db->ijab", R.values, S, np.conj(S))
    # S is Hermitian up to round-off; re-symmetrize so downstream checks see exact symmetry
    out = 0.5 * (out + np.conj(out.transpose(1, 0, 3, 2)))
    return CurvatureTensor(out, check=False)


def random_hermitian_curvature(seed: int, n: int, r: int, shift: float = 0.0) -> CurvatureTensor:
    """Seeded tensor whose Nakano matrix is ``X^H X + shift I``.

    ``X`` is a complex Gaussian ``nr x nr`` matrix scaled by ``1/sqrt(nr)``,
    so ``X^H X`` has eigenvalues of order one.
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be >= 1")
    rng = np.random.default_rng(seed)
    d = n * r
    X = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2 * d)
    M = X.conj().T @ X + shift * np.eye(d)
    M = 0.5 * (M + M.conj().T)
    return CurvatureTensor.from_nakano_matrix(M, n, r)
