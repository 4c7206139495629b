import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvpos.curvature import det_curvature, tensor_curvature
from curvpos.expr import (
    MAX_DEPTH,
    Binary,
    CertifySpec,
    Literal,
    Model,
    Scale,
    SpecError,
    SymPower,
    Twist,
    Unary,
    dump_spec,
    evaluate_expr,
    infer_shape,
    load_spec,
    parse_spec,
    spec_digest,
)
from curvpos.models import ModelSpec, fubini_study_tangent
from curvpos.positivity import nakano_test

FIXTURES = Path(__file__).parent / "fixtures"


def doc(bundle, **extra):
    return json.dumps({"schema": "curvpos.spec/1", "bundle": bundle, "tests": ["nakano"], **extra})


FS2 = {"model": "fubini_study_tangent", "n": 2}


def test_load_fixtures():
    spec = load_spec(FIXTURES / "sym2_tp2.json")
    assert spec.tests == ("nakano", "dual_nakano", "griffiths")
    assert infer_shape(spec.bundle).rank == 3
    assert infer_shape(load_spec(FIXTURES / "adjoint_p2.json").bundle).rank == 3


def test_defaults():
    spec = parse_spec(doc(FS2))
    assert spec.tolerance == 1e-9 and spec.seed == 0
    assert spec.griffiths_starts == 16 and spec.griffiths_max_iters == 200


@pytest.mark.parametrize(
    "bundle,extra,path,fragment",
    [
        ({"op": "tensor", "args": [FS2, {"model": "fubini_study_tangent", "n": 3}]}, {}, "bundle", "mismatch"),
        ({"model": "torus", "n": 2}, {}, "bundle", "unknown model"),
        ({"op": "sym_power", "k": 0, "of": FS2}, {}, "bundle.k", ">= 1"),
        ({"op": "sym_power", "k": 2, "of": FS2}, {}, "bundle", "orthonormal"),
        ({"op": "dual", "of": {"op": "sym_power", "k": 2, "of": FS2}}, {}, "bundle.of", "orthonormalize"),
        ({"op": "twist", "of": FS2, "line": FS2}, {}, "bundle.line", "rank 1"),
        ({"op": "frobnicate", "of": FS2}, {}, "bundle.op", "unknown operation"),
        ({"op": "tensor", "args": [FS2]}, {}, "bundle.args", "two"),
        ({"literal": [[1.0]]}, {}, "bundle.literal", "shape"),
        ({"literal": [[[[[1.0, 1.0]]]]]}, {}, "bundle.literal", "symmetr"),
        ({"op": "scale", "factor": "x", "of": FS2}, {}, "bundle.factor", "finite"),
        (FS2, {"tolerance": -1}, "tolerance", "non-negative"),
        (FS2, {"seed": 1.5}, "seed", "integer"),
        (FS2, {"griffiths": {"starts": 0}}, "griffiths.starts", ">= 1"),
    ],
)
def test_diagnostics(bundle, extra, path, fragment):
    with pytest.raises(SpecError) as info:
        parse_spec(doc(bundle, **extra))
    assert info.value.path == path
    assert fragment in str(info.value)


def test_bad_documents():
    with pytest.raises(SpecError, match="invalid JSON"):
        parse_spec("{")
    with pytest.raises(SpecError, match="schema"):
        parse_spec(json.dumps({"schema": "other", "bundle": FS2, "tests": ["nakano"]}))
    with pytest.raises(SpecError, match="unknown test"):
        parse_spec(json.dumps({"schema": "curvpos.spec/1", "bundle": FS2, "tests": ["kobayashi"]}))
    with pytest.raises(SpecError, match="duplicate"):
        parse_spec(json.dumps({"schema": "curvpos.spec/1", "bundle": FS2, "tests": ["nakano", "nakano"]}))


def test_depth_limit():
    node = FS2
    for _ in range(MAX_DEPTH - 1):
        node = {"op": "dual", "of": node}
    parse_spec(doc(node))
    with pytest.raises(SpecError, match="deeper"):
        parse_spec(doc({"op": "dual", "of": node}))


def test_sym_power_k1_stays_orthonormal():
    spec = parse_spec(doc({"op": "dual", "of": {"op": "sym_power", "k": 1, "of": FS2}}))
    assert evaluate_expr(spec.bundle).allclose(evaluate_expr(parse_spec(doc({"op": "dual", "of": FS2})).bundle), 1e-15)


def test_scale_may_consume_monomial_frame():
    inner = {"op": "scale", "factor": 2.0, "of": {"op": "sym_power", "k": 2, "of": FS2}}
    spec = parse_spec(doc({"op": "orthonormalize", "of": inner}))
    R = evaluate_expr(spec.bundle)
    assert nakano_test(R).margin == pytest.approx(2.0, abs=1e-9)


# ---- evaluation


def fs_model(n):
    return Model(ModelSpec("fubini_study_tangent", {"n": n}))


def test_dual_dual_is_identity():
    R = evaluate_expr(Unary("dual", Unary("dual", fs_model(3))))
    assert R.allclose(fubini_study_tangent(3), 0)


def test_tensor_with_det():
    R = evaluate_expr(Binary("tensor", fs_model(2), Unary("det", fs_model(2))))
    F = fubini_study_tangent(2)
    assert R.allclose(tensor_curvature(F, det_curvature(F).as_tensor()), 0)


def test_adjoint_expression_positive():
    spec = load_spec(FIXTURES / "adjoint_p2.json")
    R = evaluate_expr(spec.bundle)
    assert nakano_test(R).margin == pytest.approx(4.0, abs=1e-9)


def test_literal_roundtrip():
    arr = fubini_study_tangent(2).values.astype(complex)
    lit = Literal.from_array(arr)
    np.testing.assert_array_equal(lit.to_array(), arr)
    spec = CertifySpec(lit, ("nakano",))
    assert parse_spec(dump_spec(spec)) == spec


def test_digest_stable():
    a = parse_spec(doc(FS2))
    b = parse_spec(doc(FS2, tolerance=1e-9, seed=0))
    assert spec_digest(a) == spec_digest(b)
    assert spec_digest(a) != spec_digest(parse_spec(doc(FS2, seed=1)))
    assert spec_digest(a).startswith("sha256:")


# ---- round-trip property

N = 2

leaf = st.one_of(
    st.just(fs_model(N)),
    st.integers(-3, 3).map(lambda m: Model(ModelSpec("projective_line_bundle", {"n": N, "m": m}))),
    st.lists(st.integers(-2, 2), min_size=1, max_size=2).map(
        lambda d: Model(ModelSpec("direct_sum_lines", {"n": N, "degrees": tuple(d)}))
    ),
)


def extend(children):
    return st.one_of(
        st.builds(Unary, st.sampled_from(["dual", "det", "orthonormalize"]), children),
        st.builds(Binary, st.sampled_from(["tensor", "direct_sum"]), children, children),
        st.builds(Scale, children, st.floats(-4, 4, allow_nan=False)),
        st.builds(lambda e: Unary("orthonormalize", SymPower(e, 2)), children),
        st.builds(Twist, children, st.integers(-2, 2).map(
            lambda m: Model(ModelSpec("projective_line_bundle", {"n": N, "m": m})))),
    )


exprs = st.recursive(leaf, extend, max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(exprs, st.sets(st.sampled_from(["nakano", "dual_nakano", "griffiths"]), min_size=1),
       st.floats(0, 1e-3, allow_nan=False), st.integers(0, 2**31))
def test_roundtrip(expr, tests, tol, seed):
    spec = CertifySpec(expr, tuple(sorted(tests)), tol, seed)
    assert parse_spec(dump_spec(spec)) == spec
    assert parse_spec(dump_spec(spec, indent=None)) == spec
