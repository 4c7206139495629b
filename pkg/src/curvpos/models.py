"""Model geometries: the concrete bundles whose curvature is known in closed form.

Line bundles on ``P^n`` are normalized so that ``O(1)`` has curvature
``delta_ij`` at the point; then ``det T P^n = O(n + 1)`` and
``K_{P^n} = O(-(n + 1))``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .curvature import (
    CurvatureTensor,
    LineCurvature,
    direct_sum_curvature,
    dual_curvature,
    scale_curvature,
)

__all__ = [
    "ModelSpec",
    "MODEL_NAMES",
    "fubini_study_tangent",
    "projective_line_bundle",
    "canonical_bundle",
    "hyperbolic_cotangent",
    "direct_sum_lines",
    "counterexample_adjoint",
    "build_model",
]


def fubini_study_tangent(n: int) -> CurvatureTensor:
    """``(T P^n, h_FS)``: ``R[i,j,k,l] = d_ij d_kl + d_il d_kj``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    I = np.eye(n)
    R = np.einsum("ij,kl->ijkl", I, I) + np.einsum("il,kj->ijkl", I, I)
    return CurvatureTensor(R.astype(np.complex128), check=False)


def projective_line_bundle(n: int, m: int) -> LineCurvature:
    """``O_{P^n}(m)``: curvature ``m * delta_ij``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if int(m) != m:
        raise ValueError(f"line degree must be an integer, got {m}")
    return LineCurvature(int(m) * np.eye(n))


def canonical_bundle(n: int) -> LineCurvature:
    return projective_line_bundle(n, -(n + 1))


def hyperbolic_cotangent(n: int) -> CurvatureTensor:
    """Cotangent bundle of a complex hyperbolic space form, at a point.

    The tangent curvature is taken to be exactly ``-(Fubini-Study)``, so this
    is ``d_ij d_ab + d_ia d_jb``.
    """
    if n < 2:
        raise ValueError("hyperbolic_cotangent needs n >= 2")
    return dual_curvature(scale_curvature(fubini_study_tangent(n), -1.0))


def direct_sum_lines(n: int, degrees) -> CurvatureTensor:
    """``O(m_1) + ... + O(m_s)`` on ``P^n``."""
    degrees = list(degrees)
    if not degrees:
        raise ValueError("direct_sum_lines needs at least one degree")
    out = projective_line_bundle(n, degrees[0]).as_tensor()
    for m in degrees[1:]:
        out = direct_sum_curvature(out, projective_line_bundle(n, m).as_tensor())
    return out


# (n, r) -> K_S degree for E = O(1) + ... + O(1) of rank r on P^n
_ADJOINT_CASES = {(4, 2): -5, (3, 2): -4}


def counterexample_adjoint(n: int, r: int, k0: int) -> CurvatureTensor:
    """``E (x) (det E)^k0 (x) K_{P^n}`` for ``E = O(1)^{+r}`` on ``P^n``.

    Only the cases ``(P^4, O(1)+O(1))`` and ``(P^3, O(1)+O(1))`` are
    supported; the result is ``O(1 + r*k0 - (n+1))^{+r}``.
    """
    if (n, r) not in _ADJOINT_CASES:
        raise ValueError(f"unsupported (n, r) = ({n}, {r}); supported: {sorted(_ADJOINT_CASES)}")
    degree = 1 + r * k0 + _ADJOINT_CASES[(n, r)]
    return direct_sum_lines(n, [degree] * r)


MODEL_NAMES = (
    "fubini_study_tangent",
    "projective_line_bundle",
    "canonical_bundle",
    "hyperbolic_cotangent",
    "direct_sum_lines",
    "counterexample_adjoint",
)

_MODEL_PARAMS = {
    "fubini_study_tangent": ("n",),
    "projective_line_bundle": ("n", "m"),
    "canonical_bundle": ("n",),
    "hyperbolic_cotangent": ("n",),
    "direct_sum_lines": ("n", "degrees"),
    "counterexample_adjoint": ("n", "r", "k0"),
}


@dataclass(frozen=True)
class ModelSpec:
    """A named model family and its parameters."""

    name: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in _MODEL_PARAMS:
            raise ValueError(f"unknown model {self.name!r}; known: {', '.join(MODEL_NAMES)}")
        expected = set(_MODEL_PARAMS[self.name])
        got = set(self.params)
        if got != expected:
            raise ValueError(
                f"model {self.name!r} takes parameters {sorted(expected)}, got {sorted(got)}"
            )
        for key, val in self.params.items():
            vals = val if key == "degrees" else [val]
            if key == "degrees" and (not isinstance(val, (list, tuple)) or not val):
                raise ValueError("parameter 'degrees' must be a non-empty list of integers")
            for x in vals:
                if isinstance(x, bool) or not isinstance(x, int):
                    raise ValueError(f"parameter {key!r} must be integer-valued, got {x!r}")
        n = self.params["n"]
        min_n = 2 if self.name == "hyperbolic_cotangent" else 1
        if n < min_n:
            raise ValueError(f"model {self.name!r} needs n >= {min_n}, got {n}")
        if self.name == "counterexample_adjoint":
            key = (n, self.params["r"])
            if key not in _ADJOINT_CASES:
                raise ValueError(f"counterexample_adjoint: unsupported (n, r) = {key}")

    @property
    def base_dim(self) -> int:
        return self.params["n"]

    @property
    def rank(self) -> int:
        if self.name in ("fubini_study_tangent", "hyperbolic_cotangent"):
            return self.params["n"]
        if self.name == "direct_sum_lines":
            return len(self.params["degrees"])
        if self.name == "counterexample_adjoint":
            return self.params["r"]
        return 1


def build_model(spec: ModelSpec) -> CurvatureTensor:
    p = spec.params
    if spec.name == "fubini_study_tangent":
        return fubini_study_tangent(p["n"])
    if spec.name == "projective_line_bundle":
        return projective_line_bundle(p["n"], p["m"]).as_tensor()
    if spec.name == "canonical_bundle":
        return canonical_bundle(p["n"]).as_tensor()
    if spec.name == "hyperbolic_cotangent":
        return hyperbolic_cotangent(p["n"])
    if spec.name == "direct_sum_lines":
        return direct_sum_lines(p["n"], p["degrees"])
    return counterexample_adjoint(p["n"], p["r"], p["k0"])
