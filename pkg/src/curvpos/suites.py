"""Batteries of identity, example and counterexample checks, run by ``curvpos suite``.

Each check returns a dict ``{"name", "passed", "value", "bound", "detail"}``;
failures are recorded, never raised.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np

from .curvature import (
    dual_curvature,
    orthonormalize_frame,
    random_hermitian_curvature,
    scale_curvature,
    sym_power_curvature,
    tensor_curvature,
    det_curvature,
    twist_by_line,
)
from .identities import sym2_curvature_explicit, sym_power_grouped_form
from .models import (
    canonical_bundle,
    counterexample_adjoint,
    direct_sum_lines,
    fubini_study_tangent,
    hyperbolic_cotangent,
    projective_line_bundle,
)
from .multiindex import enumerate_sym_indices, permanent_delta_bruteforce
from .positivity import (
    BlockMatrix,
    dual_nakano_test,
    griffiths_test,
    nakano_test,
    schur_complement,
)
from .quadrature import (
    demailly_skoda_identity_residual,
    l2_constant,
    l2_induced_metric,
    monomial_integral_exact,
    monomial_table_mc,
)
from .report import EXIT_NOT_POSITIVE, EXIT_OK, Report, Timer

__all__ = ["SUITES", "run_suite", "orthonormal_sym_power"]

Check = dict


def _check(name: str, passed: bool, value=None, bound=None, detail: str = "") -> Check:
    return {
        "name": name,
        "passed": bool(passed),
        "value": None if value is None else float(value),
        "bound": None if bound is None else float(bound),
        "detail": detail,
    }


def _seeds(seed: int, label: str, count: int) -> np.ndarray:
    """Independent integer seeds for one check, derived from the master seed."""
    salt = int.from_bytes(label.encode("utf-8"), "little") % (2**32)
    return np.random.default_rng([seed, salt]).integers(0, 2**31 - 1, size=count)


def orthonormal_sym_power(R, k: int):
    S, g = sym_power_curvature(R, k)
    return orthonormalize_frame(S, g)


# ---------------------------------------------------------------- identities


def check_monomial_exact() -> Check:
    bad = 0
    count = 0
    for r in range(1, 5):
        for k in range(0, 4):
            basis = enumerate_sym_indices(r, k)
            for A in basis:
                for B in basis:
                    count += 1
                    expected = Fraction(permanent_delta_bruteforce(A, B), math.factorial(r + k - 1))
                    bad += monomial_integral_exact(A, B, r) != expected
    return _check("monomial_integral_exact_table", bad == 0, bad, 0, f"{count} pairs, r<=4, k<=3")


def check_monomial_mc(seed: int, samples: int = 200_000) -> Check:
    worst_z = 0.0
    worst_rel = 0.0
    for r in range(1, 5):
        for k in range(0, 4):
            basis, est, err = monomial_table_mc(r, k, samples, seed)
            for p, A in enumerate(basis):
                for q, B in enumerate(basis):
                    exact = float(monomial_integral_exact(A, B, r))
                    dev = abs(est[p, q] - exact)
                    if err[p, q] > 0:
                        worst_z = max(worst_z, dev / err[p, q])
                    elif dev > 1e-12:
                        worst_z = math.inf
                    if exact:
                        worst_rel = max(worst_rel, dev / exact)
    passed = worst_z <= 4.0 and worst_rel <= 0.02
    return _check(
        "monomial_integral_mc_agreement",
        passed,
        worst_z,
        4.0,
        f"max z-score {worst_z:.3f}, max relative error {worst_rel:.4f} (bound 0.02), {samples} samples",
    )


def check_l2_constant() -> Check:
    bad = 0
    for r in range(1, 5):
        for k in range(0, 5):
            g = l2_induced_metric(r, k)
            c = l2_constant(r, k)
            for p, A in enumerate(g.basis):
                for q, B in enumerate(g.basis):
                    bad += g.entries[p][q] != c * permanent_delta_bruteforce(A, B)
    return _check("l2_metric_constant", bad == 0, bad, 0, "r<=4, k<=4, exact rationals")


def check_demailly_skoda(seed: int, count: int = 50) -> Check:
    worst = max(demailly_skoda_identity_residual(fubini_study_tangent(n)) for n in range(1, 5))
    rng = np.random.default_rng(_seeds(seed, "ds-shapes", 1)[0])
    for s in _seeds(seed, "ds-identity", count):
        n, r = rng.integers(1, 5, size=2)
        worst = max(worst, demailly_skoda_identity_residual(random_hermitian_curvature(int(s), int(n), int(r), rng.uniform(-1, 1))))
    return _check("demailly_skoda_identity", worst < 1e-10, worst, 1e-10, f"FS n<=4 and {count} random tensors")


def check_duality(seed: int, count: int = 200) -> Check:
    worst = 0.0
    involution_ok = True
    rng = np.random.default_rng(_seeds(seed, "dual-shapes", 1)[0])
    for s in _seeds(seed, "duality", count):
        n, r = rng.integers(1, 5, size=2)
        R = random_hermitian_curvature(int(s), int(n), int(r), rng.uniform(-1, 1))
        D = dual_curvature(R)
        top = float(np.linalg.eigvalsh(D.nakano_matrix())[-1])
        worst = max(worst, abs(dual_nakano_test(R).margin + top))
        involution_ok &= bool(np.array_equal(dual_curvature(D).values, R.values))
    return _check(
        "dual_nakano_duality",
        worst <= 1e-12 and involution_ok,
        worst,
        1e-12,
        f"{count} random tensors; dual(dual(R)) == R: {involution_ok}",
    )


def check_schur(seed: int, count: int = 100) -> Check:
    min_eig = math.inf
    worst = 0.0
    for s in _seeds(seed, "schur", count):
        rng = np.random.default_rng(int(s))
        N = int(rng.integers(2, 13))
        p = int(rng.integers(1, N))
        X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        T = X @ X.conj().T + 0.1 * np.eye(N)
        S, Tinv = schur_complement(BlockMatrix.split(T, p))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0]))
        worst = max(worst, float(np.max(np.abs(T @ Tinv - np.eye(N)))))
    return _check(
        "schur_complement",
        min_eig > 0 and worst < 1e-10,
        worst,
        1e-10,
        f"{count} random PD matrices; min complement eigenvalue {min_eig:.3e}",
    )


def check_sym_power_forms(seed: int, per_shape: int = 50) -> Check:
    worst_entry = 0.0
    for n in range(1, 4):
        for r in range(1, 4):
            R = random_hermitian_curvature(int(_seeds(seed, f"curv2-{n}-{r}", 1)[0]), n, r, -0.5)
            S, _ = sym_power_curvature(R, 2)
            worst_entry = max(worst_entry, float(np.max(np.abs(S.values - sym2_curvature_explicit(R)))))
    worst_form = 0.0
    for n in range(1, 4):
        for r in range(1, 4):
            for k in range(1, 4):
                s0 = _seeds(seed, f"dd-{n}-{r}-{k}", 1)[0]
                R = random_hermitian_curvature(int(s0), n, r, -0.5)
                S, _ = sym_power_curvature(R, k)
                rng = np.random.default_rng(int(s0) + 1)
                for _ in range(per_shape):
                    u = rng.standard_normal((n, S.rank)) + 1j * rng.standard_normal((n, S.rank))
                    a = S.nakano_form(u)
                    b = sym_power_grouped_form(R, k, u)
                    worst_form = max(worst_form, abs(a - b) / max(1.0, abs(a)))
    worst = max(worst_entry, worst_form)
    return _check(
        "sym_power_curv2_curv8_grouped",
        worst < 1e-10,
        worst,
        1e-10,
        f"k=2 entrywise max {worst_entry:.2e}; grouped-form max rel {worst_form:.2e}",
    )


# ---------------------------------------------------------------- examples


def check_fs_signature() -> list[Check]:
    out = []
    for n in range(2, 6):
        R = fubini_study_tangent(n)
        nk = nakano_test(R)
        dn = dual_nakano_test(R)
        gr = griffiths_test(R)
        ok = (
            abs(nk.margin) <= 1e-9
            and nk.kernel_dim() == n * (n - 1) // 2
            and abs(dn.margin - 1) <= 1e-9
            and abs(gr.margin - 1) <= 1e-6
        )
        out.append(
            _check(
                f"fs_tangent_signature_n{n}",
                ok,
                nk.margin,
                None,
                f"nakano {nk.margin:.3e} (kernel {nk.kernel_dim()}), dual {dn.margin:.12f}, griffiths {gr.margin:.12f}",
            )
        )
    return out


def check_sym2_tp2() -> list[Check]:
    out = []
    for k in (2, 3):
        O = orthonormal_sym_power(fubini_study_tangent(2), k)
        nk, dn = nakano_test(O), dual_nakano_test(O)
        out.append(
            _check(
                f"sym{k}_tp2_nakano_and_dual",
                nk.is_positive and dn.is_positive,
                min(nk.margin, dn.margin),
                0.0,
                f"nakano {nk.margin:.12f}, dual {dn.margin:.12f}",
            )
        )
    return out


def check_symk_canonical_thresholds(seed: int) -> list[Check]:
    K = canonical_bundle(2)
    out = []
    for k, want_positive in ((3, False), (4, True)):
        R = twist_by_line(orthonormal_sym_power(fubini_study_tangent(2), k), K)
        v = griffiths_test(R, starts=32, seed=seed)
        ok = v.margin > v.tolerance if want_positive else v.margin <= v.tolerance
        out.append(_check(f"sym{k}_tp2_canonical_griffiths", ok, v.margin, v.tolerance, v.classification.value))
    return out


def check_hyperbolic() -> list[Check]:
    out = []
    for n in (2, 3):
        H = hyperbolic_cotangent(n)
        nk, dn = nakano_test(H), dual_nakano_test(H)
        out.append(
            _check(
                f"hyperbolic_cotangent_n{n}",
                abs(nk.margin - 1) <= 1e-9 and not dn.is_positive,
                dn.margin,
                None,
                f"nakano {nk.margin:.12f}; dual-nakano {dn.margin:.3e} ({dn.classification.value})",
            )
        )
    return out


def check_tp_twisted_semi_griffiths(seed: int) -> Check:
    worst = 0.0
    for n in range(2, 5):
        R = twist_by_line(fubini_study_tangent(n), projective_line_bundle(n, -1))
        worst = max(worst, abs(griffiths_test(R, seed=seed).margin))
    return _check("tp_twisted_minus_one_semi_griffiths", worst <= 1e-9, worst, 1e-9, "n=2..4")


def demailly_skoda_property(seed: int, candidates: int = 80, starts: int = 32):
    """E (x) det E for random Griffiths-accepted E; returns (accepted, hard, soft, non_nakano)."""
    rng = np.random.default_rng(_seeds(seed, "ds-property-shapes", 1)[0])
    accepted = hard = soft = non_nakano = 0
    for s in _seeds(seed, "ds-property", candidates):
        n, r = (int(x) for x in rng.integers(2, 4, size=2))
        R = random_hermitian_curvature(int(s), n, r, float(rng.uniform(-0.25, 0.1)))
        g = griffiths_test(R, starts=starts, seed=int(s))
        if g.margin <= 0.05:
            continue
        accepted += 1
        non_nakano += not nakano_test(R).is_positive
        E = tensor_curvature(R, det_curvature(R).as_tensor())
        if nakano_test(E).is_positive and dual_nakano_test(E).is_positive:
            continue
        if g.inconclusive:
            soft += 1
        else:
            hard += 1
    return accepted, hard, soft, non_nakano


def check_demailly_skoda_property(seed: int) -> Check:
    accepted, hard, soft, non_nakano = demailly_skoda_property(seed)
    return _check(
        "demailly_skoda_property",
        hard == 0 and accepted > 0,
        hard,
        0,
        f"{accepted} Griffiths-accepted ({non_nakano} not Nakano-positive); soft failures {soft}",
    )


def sym_power_preservation(seed: int, count: int = 50):
    """Nakano- and dual-Nakano-positive inputs; returns lists of failing (seed, k)."""
    rng = np.random.default_rng(_seeds(seed, "good-shapes", 1)[0])
    fails_nk, fails_dn = [], []
    for s in _seeds(seed, "good", count):
        n, r = (int(x) for x in rng.integers(1, 4, size=2))
        shift = float(rng.uniform(0.01, 0.5))
        R = random_hermitian_curvature(int(s), n, r, shift)
        Rd = dual_curvature(scale_curvature(random_hermitian_curvature(int(s) + 1, n, r, shift), -1.0))
        for k in (2, 3):
            if not nakano_test(orthonormal_sym_power(R, k)).is_positive:
                fails_nk.append((int(s), k))
            if not dual_nakano_test(orthonormal_sym_power(Rd, k)).is_positive:
                fails_dn.append((int(s), k))
    return fails_nk, fails_dn


def check_sym_power_preservation(seed: int) -> Check:
    fails_nk, fails_dn = sym_power_preservation(seed)
    return _check(
        "sym_power_preserves_nakano",
        not fails_nk and not fails_dn,
        len(fails_nk) + len(fails_dn),
        0,
        "50 Nakano-positive and 50 dual-Nakano-positive inputs, k in (2, 3)",
    )


# ---------------------------------------------------------------- counterexamples


def check_adjoint_sharpness() -> list[Check]:
    out = []
    for (n, r, k0, positive) in ((4, 2, 2, False), (4, 2, 3, True), (3, 2, 1, False), (3, 2, 2, True)):
        v = nakano_test(counterexample_adjoint(n, r, k0))
        out.append(
            _check(
                f"adjoint_P{n}_rank{r}_k0_{k0}",
                v.is_positive == positive,
                v.margin,
                v.tolerance,
                v.classification.value,
            )
        )
    return out


def check_tp_not_nakano() -> Check:
    ok = all(not nakano_test(fubini_study_tangent(n)).is_positive for n in range(2, 6))
    return _check("tp_not_nakano_positive", ok, None, None, "n=2..5")


def check_split_indefinite() -> Check:
    v = griffiths_test(direct_sum_lines(1, [1, -1]))
    return _check("O1_plus_Ominus1_indefinite", abs(v.margin + 1) <= 1e-12 and v.classification.value == "indefinite", v.margin, None, v.classification.value)


def check_symn1_canonical_not_positive(seed: int) -> Check:
    vals = []
    for n in (2, 3):
        R = twist_by_line(orthonormal_sym_power(fubini_study_tangent(n), n + 1), canonical_bundle(n))
        vals.append(griffiths_test(R, seed=seed).margin)
    return _check("sym_n_plus_1_canonical_not_griffiths_positive", max(vals) <= 1e-9, max(vals), 1e-9, "n=2,3")


# ---------------------------------------------------------------- runner


def _identities(seed: int, timer: Timer) -> list[Check]:
    out = []
    for name, fn in (
        ("monomial_exact", check_monomial_exact),
        ("monomial_mc", lambda: check_monomial_mc(seed)),
        ("l2_constant", check_l2_constant),
        ("demailly_skoda", lambda: check_demailly_skoda(seed)),
        ("duality", lambda: check_duality(seed)),
        ("schur", lambda: check_schur(seed)),
        ("sym_power_forms", lambda: check_sym_power_forms(seed)),
    ):
        with timer.block(name):
            out.append(fn())
    return out


def _examples(seed: int, timer: Timer) -> list[Check]:
    out = []
    with timer.block("fs_signature"):
        out += check_fs_signature()
    with timer.block("sym_tp2"):
        out += check_sym2_tp2()
    with timer.block("symk_canonical"):
        out += check_symk_canonical_thresholds(seed)
    with timer.block("hyperbolic"):
        out += check_hyperbolic()
    with timer.block("tp_twisted"):
        out.append(check_tp_twisted_semi_griffiths(seed))
    with timer.block("ds_property"):
        out.append(check_demailly_skoda_property(seed))
    with timer.block("sym_power_preservation"):
        out.append(check_sym_power_preservation(seed))
    return out


def _counterexamples(seed: int, timer: Timer) -> list[Check]:
    out = []
    with timer.block("adjoint"):
        out += check_adjoint_sharpness()
    with timer.block("tp_not_nakano"):
        out.append(check_tp_not_nakano())
    with timer.block("split_indefinite"):
        out.append(check_split_indefinite())
    with timer.block("symn1_canonical"):
        out.append(check_symn1_canonical_not_positive(seed))
    return out


SUITES: dict[str, tuple[Callable, ...]] = {
    "identities": (_identities,),
    "examples": (_examples,),
    "counterexamples": (_counterexamples,),
    "all": (_identities, _examples, _counterexamples),
}


def run_suite(name: str, seed: int = 0, timings: bool = False) -> Report:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    timer = Timer(timings)
    checks: list[Check] = []
    for part in SUITES[name]:
        checks += part(seed, timer)
    residuals = {c["name"]: c["value"] for c in checks if c["bound"] is not None and c["value"] is not None}
    return Report(
        kind="suite",
        seed=seed,
        subject={"suite": name},
        checks=checks,
        residuals=residuals,
        exit_code=EXIT_OK if all(c["passed"] for c in checks) else EXIT_NOT_POSITIVE,
        timings=timer.result(),
    )
