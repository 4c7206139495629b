"""Bundle expressions and the JSON spec format read by ``curvpos certify``.

A spec document looks like::

    {
      "schema": "curvpos.spec/1",
      "bundle": {"op": "orthonormalize",
                 "of": {"op": "sym_power", "k": 2,
                        "of": {"model": "fubini_study_tangent", "n": 2}}},
      "tests": ["nakano", "dual_nakano"],
      "tolerance": 1e-9,
      "seed": 0,
      "griffiths": {"starts": 16, "max_iters": 200}
    }

Only ``schema``, ``bundle`` and ``tests`` are required.  Bundle nodes are
either leaves (``{"model": name, ...params}`` or ``{"literal": R}`` with
``R[i][j][a][b] = [re, im]``) or operator nodes keyed by ``"op"``:

    dual, det, orthonormalize     {"op": ..., "of": X}
    tensor, direct_sum            {"op": ..., "args": [X, Y]}
    twist                         {"op": "twist", "of": X, "line": L}   (L rank 1)
    sym_power                     {"op": "sym_power", "k": k, "of": X}
    scale                         {"op": "scale", "factor": c, "of": X}

``sym_power`` with ``k >= 2`` yields a tensor in the (non-orthonormal)
monomial frame; only ``scale`` and ``orthonormalize`` may consume it, and a
certified bundle must be orthonormal at the root.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from .curvature import (
    CurvatureTensor,
    LineCurvature,
    MetricGram,
    det_curvature,
    direct_sum_curvature,
    dual_curvature,
    orthonormalize_frame,
    scale_curvature,
    sym_power_curvature,
    tensor_curvature,
    twist_by_line,
)
from .models import ModelSpec, build_model
from .multiindex import sym_dimension
from .positivity import DEFAULT_TOLERANCE

__all__ = [
    "SCHEMA",
    "TEST_NAMES",
    "SpecError",
    "Model",
    "Literal",
    "Unary",
    "Binary",
    "Twist",
    "SymPower",
    "Scale",
    "BundleExpr",
    "CertifySpec",
    "parse_spec",
    "load_spec",
    "dump_spec",
    "spec_to_dict",
    "expr_to_dict",
    "expr_from_dict",
    "infer_shape",
    "evaluate_expr",
    "spec_digest",
]

SCHEMA = "curvpos.spec/1"
TEST_NAMES = ("nakano", "dual_nakano", "griffiths")
MAX_DEPTH = 32
UNARY_OPS = ("dual", "det", "orthonormalize")
BINARY_OPS = ("tensor", "direct_sum")


class SpecError(ValueError):
    """Invalid spec; ``path`` locates the offending node (e.g. ``bundle.args[1]``)."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True)
class Model:
    spec: ModelSpec


@dataclass(frozen=True)
class Literal:
    # nested tuples of complex, indexed [i][j][a][b]
    values: tuple

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Literal":
        arr = np.asarray(arr, dtype=np.complex128)
        return cls(tuple(tuple(tuple(tuple(complex(z) for z in row) for row in blk) for blk in mat) for mat in arr))

    def to_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.complex128)


@dataclass(frozen=True)
class Unary:
    op: str
    of: "BundleExpr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "BundleExpr"
    right: "BundleExpr"


@dataclass(frozen=True)
class Twist:
    of: "BundleExpr"
    line: "BundleExpr"


@dataclass(frozen=True)
class SymPower:
    of: "BundleExpr"
    k: int


@dataclass(frozen=True)
class Scale:
    of: "BundleExpr"
    factor: float


BundleExpr = Union[Model, Literal, Unary, Binary, Twist, SymPower, Scale]


@dataclass(frozen=True)
class CertifySpec:
    bundle: BundleExpr
    tests: tuple[str, ...]
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0
    griffiths_starts: int = 16
    griffiths_max_iters: int = 200


# ---------------------------------------------------------------- parsing


def _int_field(node: dict, key: str, path: str, minimum: Optional[int] = None) -> int:
    if key not in node:
        raise SpecError(path, f"missing field {key!r}")
    val = node[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise SpecError(f"{path}.{key}", f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise SpecError(f"{path}.{key}", f"must be >= {minimum}, got {val}")
    return val


def _check_keys(node: dict, allowed: set, path: str):
    extra = set(node) - allowed
    if extra:
        raise SpecError(path, f"unexpected field(s) {sorted(extra)}")


def _parse_literal(raw: Any, path: str) -> Literal:
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(path, "literal must be a nested array of [re, im] pairs") from None
    if arr.ndim != 5 or arr.shape[-1] != 2:
        raise SpecError(path, f"literal must have shape (n, n, r, r, 2), got {arr.shape}")
    values = arr[..., 0] + 1j * arr[..., 1]
    try:
        CurvatureTensor(values)
    except ValueError as exc:
        raise SpecError(path, str(exc)) from None
    return Literal.from_array(values)


def expr_from_dict(node: Any, path: str = "bundle", depth: int = 1) -> BundleExpr:
    """Build (without shape checks) an expression tree from decoded JSON."""
    if depth > MAX_DEPTH:
        raise SpecError(path, f"expression deeper than {MAX_DEPTH}")
    if not isinstance(node, dict):
        raise SpecError(path, f"expected an object, got {type(node).__name__}")
    if "model" in node:
        params = {k: v for k, v in node.items() if k != "model"}
        if "degrees" in params and isinstance(params["degrees"], list):
            params["degrees"] = tuple(params["degrees"])
        try:
            return Model(ModelSpec(node["model"], params))
        except ValueError as exc:
            raise SpecError(path, str(exc)) from None
    if "literal" in node:
        _check_keys(node, {"literal"}, path)
        return _parse_literal(node["literal"], f"{path}.literal")
    op = node.get("op")
    if op is None:
        raise SpecError(path, "node needs one of 'model', 'literal' or 'op'")
    sub = lambda key: expr_from_dict(node.get(key), f"{path}.{key}", depth + 1)  # noqa: E731
    if op in UNARY_OPS:
        _check_keys(node, {"op", "of"}, path)
        return Unary(op, sub("of"))
    if op in BINARY_OPS:
        _check_keys(node, {"op", "args"}, path)
        args = node.get("args")
        if not isinstance(args, list) or len(args) != 2:
            raise SpecError(f"{path}.args", "expected a list of two expressions")
        return Binary(
            op,
            expr_from_dict(args[0], f"{path}.args[0]", depth + 1),
            expr_from_dict(args[1], f"{path}.args[1]", depth + 1),
        )
    if op == "twist":
        _check_keys(node, {"op", "of", "line"}, path)
        return Twist(sub("of"), sub("line"))
    if op == "sym_power":
        _check_keys(node, {"op", "of", "k"}, path)
        return SymPower(sub("of"), _int_field(node, "k", path, minimum=1))
    if op == "scale":
        _check_keys(node, {"op", "of", "factor"}, path)
        factor = node.get("factor")
        if isinstance(factor, bool) or not isinstance(factor, (int, float)) or not np.isfinite(factor):
            raise SpecError(f"{path}.factor", f"expected a finite number, got {factor!r}")
        return Scale(sub("of"), float(factor))
    raise SpecError(f"{path}.op", f"unknown operation {op!r}")


@dataclass(frozen=True)
class Shape:
    base_dim: int
    rank: int
    orthonormal: bool = True


def infer_shape(expr: BundleExpr, path: str = "bundle") -> Shape:
    """Base dimension, rank and frame type of ``expr``; raises :class:`SpecError`."""

    def need_orthonormal(s: Shape, p: str, what: str):
        if not s.orthonormal:
            raise SpecError(p, f"{what} needs an orthonormal-frame input; wrap the sym_power in orthonormalize")

    if isinstance(expr, Model):
        return Shape(expr.spec.base_dim, expr.spec.rank)
    if isinstance(expr, Literal):
        a = expr.to_array()
        return Shape(a.shape[0], a.shape[2])
    if isinstance(expr, Unary):
        s = infer_shape(expr.of, f"{path}.of")
        if expr.op == "orthonormalize":
            return Shape(s.base_dim, s.rank, True)
        need_orthonormal(s, f"{path}.of", expr.op)
        if expr.op == "det":
            return Shape(s.base_dim, 1)
        return s
    if isinstance(expr, Binary):
        s1 = infer_shape(expr.left, f"{path}.args[0]")
        s2 = infer_shape(expr.right, f"{path}.args[1]")
        need_orthonormal(s1, f"{path}.args[0]", expr.op)
        need_orthonormal(s2, f"{path}.args[1]", expr.op)
        if s1.base_dim != s2.base_dim:
            raise SpecError(path, f"base dimension mismatch in {expr.op}: {s1.base_dim} != {s2.base_dim}")
        rank = s1.rank * s2.rank if expr.op == "tensor" else s1.rank + s2.rank
        return Shape(s1.base_dim, rank)
    if isinstance(expr, Twist):
        s = infer_shape(expr.of, f"{path}.of")
        ls = infer_shape(expr.line, f"{path}.line")
        need_orthonormal(s, f"{path}.of", "twist")
        need_orthonormal(ls, f"{path}.line", "twist")
        if ls.rank != 1:
            raise SpecError(f"{path}.line", f"twist line must have rank 1, got {ls.rank}")
        if s.base_dim != ls.base_dim:
            raise SpecError(path, f"base dimension mismatch in twist: {s.base_dim} != {ls.base_dim}")
        return s
    if isinstance(expr, SymPower):
        s = infer_shape(expr.of, f"{path}.of")
        need_orthonormal(s, f"{path}.of", "sym_power")
        return Shape(s.base_dim, sym_dimension(s.rank, expr.k), expr.k == 1)
    if isinstance(expr, Scale):
        return infer_shape(expr.of, f"{path}.of")
    raise TypeError(f"not a bundle expression: {expr!r}")


def parse_spec(text: str) -> CertifySpec:
    """Parse and validate a spec document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SpecError("$", "spec must be a JSON object")
    _check_keys(doc, {"schema", "bundle", "tests", "tolerance", "seed", "griffiths"}, "$")
    if doc.get("schema") != SCHEMA:
        raise SpecError("schema", f"expected {SCHEMA!r}, got {doc.get('schema')!r}")
    if "bundle" not in doc:
        raise SpecError("$", "missing field 'bundle'")
    bundle = expr_from_dict(doc["bundle"])
    shape = infer_shape(bundle)
    if not shape.orthonormal:
        raise SpecError("bundle", "certified bundle must be in an orthonormal frame; wrap the sym_power in orthonormalize")

    tests = doc.get("tests")
    if not isinstance(tests, list) or not tests:
        raise SpecError("tests", "expected a non-empty list of test names")
    for t_i, t in enumerate(tests):
        if t not in TEST_NAMES:
            raise SpecError(f"tests[{t_i}]", f"unknown test {t!r}; known: {', '.join(TEST_NAMES)}")
    if len(set(tests)) != len(tests):
        raise SpecError("tests", "duplicate test names")

    tolerance = doc.get("tolerance", DEFAULT_TOLERANCE)
    if isinstance(tolerance, bool) or not isinstance(tolerance, (int, float)) or not tolerance >= 0:
        raise SpecError("tolerance", f"expected a non-negative number, got {tolerance!r}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise SpecError("seed", f"expected a non-negative integer, got {seed!r}")
    g = doc.get("griffiths", {})
    if not isinstance(g, dict):
        raise SpecError("griffiths", "expected an object")
    _check_keys(g, {"starts", "max_iters"}, "griffiths")
    starts = _int_field(g, "starts", "griffiths", 1) if "starts" in g else 16
    max_iters = _int_field(g, "max_iters", "griffiths", 1) if "max_iters" in g else 200
    return CertifySpec(bundle, tuple(tests), float(tolerance), seed, starts, max_iters)


def load_spec(path) -> CertifySpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


# ---------------------------------------------------------------- printing


def expr_to_dict(expr: BundleExpr) -> dict:
    if isinstance(expr, Model):
        out = {"model": expr.spec.name}
        for key, val in expr.spec.params.items():
            out[key] = list(val) if isinstance(val, tuple) else val
        return out
    if isinstance(expr, Literal):
        a = expr.to_array()
        return {"literal": np.stack([a.real, a.imag], axis=-1).tolist()}
    if isinstance(expr, Unary):
        return {"op": expr.op, "of": expr_to_dict(expr.of)}
    if isinstance(expr, Binary):
        return {"op": expr.op, "args": [expr_to_dict(expr.left), expr_to_dict(expr.right)]}
    if isinstance(expr, Twist):
        return {"op": "twist", "of": expr_to_dict(expr.of), "line": expr_to_dict(expr.line)}
    if isinstance(expr, SymPower):
        return {"op": "sym_power", "k": expr.k, "of": expr_to_dict(expr.of)}
    if isinstance(expr, Scale):
        return {"op": "scale", "factor": expr.factor, "of": expr_to_dict(expr.of)}
    raise TypeError(f"not a bundle expression: {expr!r}")


def spec_to_dict(spec: CertifySpec) -> dict:
    return {
        "schema": SCHEMA,
        "bundle": expr_to_dict(spec.bundle),
        "tests": list(spec.tests),
        "tolerance": spec.tolerance,
        "seed": spec.seed,
        "griffiths": {"starts": spec.griffiths_starts, "max_iters": spec.griffiths_max_iters},
    }


def dump_spec(spec: CertifySpec, indent: Optional[int] = 2) -> str:
    return json.dumps(spec_to_dict(spec), indent=indent)


def spec_digest(spec: CertifySpec) -> str:
    canonical = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- evaluation


def _eval(expr: BundleExpr) -> tuple[CurvatureTensor, Optional[MetricGram]]:
    if isinstance(expr, Model):
        return build_model(expr.spec), None
    if isinstance(expr, Literal):
        return CurvatureTensor(expr.to_array()), None
    if isinstance(expr, Unary):
        R, g = _eval(expr.of)
        if expr.op == "orthonormalize":
            return (R if g is None else orthonormalize_frame(R, g)), None
        if expr.op == "dual":
            return dual_curvature(R), None
        return det_curvature(R).as_tensor(), None
    if isinstance(expr, Binary):
        R1, _ = _eval(expr.left)
        R2, _ = _eval(expr.right)
        if expr.op == "tensor":
            return tensor_curvature(R1, R2), None
        return direct_sum_curvature(R1, R2), None
    if isinstance(expr, Twist):
        R, _ = _eval(expr.of)
        L, _ = _eval(expr.line)
        return twist_by_line(R, LineCurvature.from_tensor(L)), None
    if isinstance(expr, SymPower):
        R, _ = _eval(expr.of)
        S, g = sym_power_curvature(R, expr.k)
        return S, (None if expr.k == 1 else g)
    if isinstance(expr, Scale):
        R, g = _eval(expr.of)
        return scale_curvature(R, expr.factor), g
    raise TypeError(f"not a bundle expression: {expr!r}")


def evaluate_expr(expr: BundleExpr) -> CurvatureTensor:
    """Evaluate bottom-up; the tree is shape-checked first."""
    shape = infer_shape(expr)
    R, g = _eval(expr)
    if g is not None or not shape.orthonormal:
        raise SpecError("bundle", "expression evaluates to a monomial-frame tensor; wrap it in orthonormalize")
    return R
