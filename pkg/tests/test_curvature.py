import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvpos.curvature import (
    CurvatureTensor,
    LineCurvature,
    MetricGram,
    det_curvature,
    direct_sum_curvature,
    dual_curvature,
    orthonormalize_frame,
    random_hermitian_curvature,
    scale_curvature,
    sym_power_curvature,
    symmetry_defect,
    tensor_curvature,
    twist_by_line,
)
from curvpos.identities import sym2_curvature_explicit, sym_power_grouped_form
from curvpos.models import canonical_bundle, fubini_study_tangent
from curvpos.multiindex import enumerate_sym_indices, permanent_delta_bruteforce
from curvpos.positivity import nakano_test

seeds = st.integers(0, 2**31 - 1)
dims = st.integers(1, 3)


def rand(seed, n, r, shift=0.0):
    return random_hermitian_curvature(seed, n, r, shift)


def line(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return LineCurvature(X + X.conj().T)


def test_rejects_asymmetric():
    v = np.zeros((1, 1, 2, 2), complex)
    v[0, 0, 0, 1] = 1.0
    with pytest.raises(ValueError, match="symmetry"):
        CurvatureTensor(v)


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        CurvatureTensor(np.full((1, 1, 1, 1), np.nan))


def test_immutable():
    R = fubini_study_tangent(2)
    with pytest.raises(ValueError):
        R.values[0, 0, 0, 0] = 3


# ---- dual


def test_dual_zero():
    assert np.all(dual_curvature(CurvatureTensor.zeros(2, 3)).values == 0)


def test_dual_fs_n1():
    assert dual_curvature(fubini_study_tangent(1)).values[0, 0, 0, 0] == -2


@given(seeds, dims, dims)
def test_dual_involution(seed, n, r):
    R = rand(seed, n, r, -0.3)
    assert np.array_equal(dual_curvature(dual_curvature(R)).values, R.values)


# ---- tensor / det / twist / sum


def test_tensor_with_zero_line_is_identity():
    R = rand(1, 2, 3)
    out = tensor_curvature(R, CurvatureTensor.zeros(2, 1))
    assert out.rank == 3
    assert out.allclose(R, 0.0)


def test_tensor_fs_with_det():
    R = fubini_study_tangent(2)
    D = det_curvature(R)
    np.testing.assert_array_equal(D.values, 3 * np.eye(2))
    out = tensor_curvature(R, D.as_tensor())
    expected = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            for a in range(2):
                for b in range(2):
                    expected[i, j, a, b] = (i == j) * (a == b) + (i == b) * (a == j) + 3 * (i == j) * (a == b)
    np.testing.assert_array_equal(out.values, expected)


def test_tensor_of_lines_adds():
    c1, c2 = line(1, 3), line(2, 3)
    out = tensor_curvature(c1.as_tensor(), c2.as_tensor())
    np.testing.assert_allclose(out.values[:, :, 0, 0], c1.values + c2.values, atol=1e-15)


def test_tensor_index_layout():
    R1, R2 = rand(3, 2, 2), rand(4, 2, 3)
    out = tensor_curvature(R1, R2).values
    for a in range(2):
        for c in range(3):
            for b in range(2):
                for d in range(3):
                    ref = R1.values[:, :, a, b] * (c == d) + (a == b) * R2.values[:, :, c, d]
                    np.testing.assert_allclose(out[:, :, a * 3 + c, b * 3 + d], ref, atol=1e-15)


def test_tensor_base_mismatch():
    with pytest.raises(ValueError, match="base dimension"):
        tensor_curvature(rand(1, 2, 2), rand(1, 3, 2))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_det_fs(n):
    np.testing.assert_array_equal(det_curvature(fubini_study_tangent(n)).values, (n + 1) * np.eye(n))


def test_det_zero():
    assert np.all(det_curvature(CurvatureTensor.zeros(3, 2)).values == 0)


@given(seeds, dims, dims, dims)
def test_det_additive_on_direct_sum(seed, n, r1, r2):
    R1, R2 = rand(seed, n, r1, -0.2), rand(seed + 1, n, r2, 0.1)
    lhs = det_curvature(direct_sum_curvature(R1, R2)).values
    rhs = det_curvature(R1).values + det_curvature(R2).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_direct_sum_o1_o1_p4():
    o1 = LineCurvature(np.eye(4)).as_tensor()
    S = direct_sum_curvature(o1, o1)
    assert S.rank == 2
    np.testing.assert_array_equal(det_curvature(S).values, 2 * np.eye(4))
    assert np.all(S.values[:, :, 0, 1] == 0)


@given(seeds, dims, dims, dims)
@settings(max_examples=30)
def test_direct_sum_spectrum_is_union(seed, n, r1, r2):
    R1, R2 = rand(seed, n, r1, -0.5), rand(seed + 7, n, r2, 0.2)
    got = np.sort(np.linalg.eigvalsh(direct_sum_curvature(R1, R2).nakano_matrix()))
    want = np.sort(np.concatenate([np.linalg.eigvalsh(R1.nakano_matrix()), np.linalg.eigvalsh(R2.nakano_matrix())]))
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_twist_zero_identity():
    R = rand(5, 2, 2)
    assert twist_by_line(R, LineCurvature(np.zeros((2, 2)))).allclose(R, 0.0)


def test_twist_fs_by_canonical():
    out = twist_by_line(fubini_study_tangent(2), canonical_bundle(2)).values
    I = np.eye(2)
    ref = np.einsum("ij,ab->ijab", I, I) + np.einsum("ib,aj->ijab", I, I) - 3 * np.einsum("ij,ab->ijab", I, I)
    np.testing.assert_array_equal(out, ref)


@given(seeds, dims, dims)
def test_twist_inverse(seed, n, r):
    R, c = rand(seed, n, r), line(seed, n)
    back = twist_by_line(twist_by_line(R, c), LineCurvature(-c.values))
    assert back.allclose(R, 1e-12)


@given(seeds, dims, dims)
def test_det_of_twist(seed, n, r):
    R, c = rand(seed, n, r), line(seed + 3, n)
    lhs = det_curvature(tensor_curvature(R, c.as_tensor())).values
    np.testing.assert_allclose(lhs, det_curvature(R).values + r * c.values, atol=1e-12)


@given(seeds, dims, dims, st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_constructions_preserve_symmetry(seed, n, r, k):
    R1, R2 = rand(seed, n, r, -0.4), rand(seed + 1, n, r, 0.3)
    c = line(seed, n)
    S, g = sym_power_curvature(R1, k)
    outs = [
        dual_curvature(R1),
        tensor_curvature(R1, R2),
        direct_sum_curvature(R1, R2),
        twist_by_line(R1, c),
        det_curvature(R1).as_tensor(),
        scale_curvature(R1, -2.5),
        S,
        orthonormalize_frame(S, g),
    ]
    for out in outs:
        assert symmetry_defect(out.values) <= 1e-12


# ---- symmetric powers


def test_sym_power_k1():
    R = rand(2, 2, 3)
    S, g = sym_power_curvature(R, 1)
    assert S.allclose(R, 0.0)
    assert g.is_identity()


def test_sym_power_k0_rejected():
    with pytest.raises(ValueError):
        sym_power_curvature(rand(2, 2, 2), 0)


def test_sym2_fs_entry():
    S, g = sym_power_curvature(fubini_study_tangent(2), 2)
    # basis (1,1),(1,2),(2,2); four terms of 2 each
    assert S.values[0, 0, 0, 0] == 8
    np.testing.assert_array_equal(np.diag(g.values), [2, 1, 2])


def test_sym_power_gram_is_permanent():
    for r in range(1, 4):
        for k in range(1, 4):
            _, g = sym_power_curvature(CurvatureTensor.zeros(1, r), k)
            basis = enumerate_sym_indices(r, k)
            ref = [[permanent_delta_bruteforce(A, B) for B in basis] for A in basis]
            np.testing.assert_array_equal(g.values, ref)


def test_sym2_explicit_matches_general_exhaustive():
    for n in range(1, 4):
        for r in range(1, 4):
            R = rand(10 * n + r, n, r, -0.3)
            S, _ = sym_power_curvature(R, 2)
            np.testing.assert_allclose(S.values, sym2_curvature_explicit(R), rtol=0, atol=1e-12)


@pytest.mark.parametrize("n,r,k", [(n, r, k) for n in (1, 2, 3) for r in (1, 2, 3) for k in (1, 2, 3)])
def test_grouped_form_matches(n, r, k):
    R = rand(100 * n + 10 * r + k, n, r, -0.5)
    S, _ = sym_power_curvature(R, k)
    rng = np.random.default_rng(k)
    for _ in range(50):
        u = rng.standard_normal((n, S.rank)) + 1j * rng.standard_normal((n, S.rank))
        a = S.nakano_form(u)
        assert abs(a - sym_power_grouped_form(R, k, u)) <= 1e-10 * max(1.0, abs(a))


def test_sym_power_of_twist_adds_k_times_line():
    R, c = rand(9, 2, 2), line(9, 2)
    k = 3
    lhs = orthonormalize_frame(*sym_power_curvature(twist_by_line(R, c), k))
    rhs = twist_by_line(orthonormalize_frame(*sym_power_curvature(R, k)), LineCurvature(k * c.values))
    assert lhs.allclose(rhs, 1e-12)


# ---- orthonormalization


def test_orthonormalize_identity_gram():
    R = rand(4, 2, 3)
    assert orthonormalize_frame(R, MetricGram(np.eye(3))).allclose(R, 1e-14)


def test_orthonormalize_scaling():
    R = rand(4, 2, 3, -0.2)
    base = nakano_test(orthonormalize_frame(R, MetricGram(np.eye(3))))
    for lam in (0.25, 4.0, 10.0):
        v = nakano_test(orthonormalize_frame(R, MetricGram(lam * np.eye(3))))
        assert v.classification == base.classification
        assert v.margin == pytest.approx(base.margin / lam, rel=1e-12)


def test_orthonormalize_general_frame_oracle():
    # curvature in frame f_a = sum_c P[c, a] e_c is P^T R conj(P); Gram is P^H P
    R = rand(6, 2, 3, 0.1)
    rng = np.random.default_rng(0)
    P = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) + 3 * np.eye(3)
    Rf = CurvatureTensor(np.einsum("ijcd,ca,db->ijab", R.values, P, np.conj(P)))
    g = MetricGram(P.T @ np.conj(P))
    back = orthonormalize_frame(Rf, g)
    # same Hermitian form up to a unitary change of frame: spectra agree
    np.testing.assert_allclose(
        np.linalg.eigvalsh(back.nakano_matrix()), np.linalg.eigvalsh(R.nakano_matrix()), atol=1e-10
    )


def test_orthonormalize_rejects_singular():
    with pytest.raises(ValueError, match="positive definite"):
        orthonormalize_frame(rand(1, 1, 2), MetricGram(np.diag([1.0, 0.0])))


def test_s2_tp2_pipeline_positive():
    S, g = sym_power_curvature(fubini_study_tangent(2), 2)
    assert nakano_test(orthonormalize_frame(S, g)).margin > 0


# ---- random generator


def test_random_deterministic():
    assert np.array_equal(rand(42, 2, 3, 0.1).values, rand(42, 2, 3, 0.1).values)


@pytest.mark.parametrize("shift", [0.1, 1.0])
def test_random_shift_lower_bound(shift):
    for s in range(10):
        assert nakano_test(rand(s, 2, 2, shift)).margin >= shift - 1e-12


def test_random_large_negative_shift_indefinite():
    classes = {nakano_test(rand(s, 2, 2, -0.5)).classification.value for s in range(10)}
    assert "indefinite" in classes
