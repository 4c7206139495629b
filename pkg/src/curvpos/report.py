"""Machine-readable reports for ``certify`` and ``suite`` runs.

Reports serialize to JSON with a fixed key order.  Nothing time-dependent
goes in unless timings are explicitly requested, so a given
``(spec, seed, version)`` always produces byte-identical output.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .curvature import CurvatureTensor
from .expr import CertifySpec, evaluate_expr, spec_digest
from .positivity import Verdict, dual_nakano_test, griffiths_test, nakano_test

__all__ = [
    "REPORT_SCHEMA",
    "EXIT_OK",
    "EXIT_NOT_POSITIVE",
    "EXIT_INCONCLUSIVE",
    "EXIT_USAGE",
    "Report",
    "verdict_to_dict",
    "certify",
    "exit_code_for",
    "Timer",
]

REPORT_SCHEMA = "curvpos.report/1"
EXIT_OK = 0
EXIT_NOT_POSITIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3


def _complex_pairs(x: np.ndarray) -> list[list[float]]:
    flat = np.asarray(x, dtype=np.complex128).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def verdict_to_dict(test: str, v: Verdict) -> dict:
    d = {
        "test": test,
        "classification": v.classification.value,
        "margin": float(v.margin),
        "max_value": float(v.max_value),
        "tolerance": float(v.tolerance),
        "method": v.method.value,
        "starts_used": int(v.starts_used),
        "converged": bool(v.converged),
        "witness": {
            "shape": list(v.witness.shape),
            "index": "u[i][a] row-major, i base, a fiber",
            "values": _complex_pairs(v.witness),
        },
    }
    if v.witness_factors is not None:
        u, w = v.witness_factors
        d["witness"]["factors"] = {"u": _complex_pairs(u), "v": _complex_pairs(w)}
    return d


@dataclass
class Report:
    kind: str
    seed: int
    subject: dict
    spec_digest: Optional[str] = None
    verdicts: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    exit_code: int = EXIT_OK
    timings: Optional[dict] = None
    version: str = __version__

    def to_dict(self) -> dict:
        out = {
            "schema": REPORT_SCHEMA,
            "tool": "curvpos",
            "version": self.version,
            "kind": self.kind,
            "spec_digest": self.spec_digest,
            "seed": self.seed,
            "subject": self.subject,
            "verdicts": self.verdicts,
            "checks": self.checks,
            "residuals": self.residuals,
            "exit_code": self.exit_code,
        }
        if self.timings is not None:
            out["timings"] = self.timings
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        if d.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"not a {REPORT_SCHEMA} document")
        return cls(
            kind=d["kind"],
            seed=d["seed"],
            subject=d["subject"],
            spec_digest=d["spec_digest"],
            verdicts=d["verdicts"],
            checks=d["checks"],
            residuals=d["residuals"],
            exit_code=d["exit_code"],
            timings=d.get("timings"),
            version=d["version"],
        )

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        return isinstance(other, Report) and self.to_dict() == other.to_dict()


class Timer:
    """Collects wall-clock timings per named block, only when enabled."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.data: dict[str, float] = {}

    @contextmanager
    def block(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            if self.enabled:
                self.data[name] = round(time.perf_counter() - t0, 6)

    def result(self) -> Optional[dict]:
        return dict(self.data) if self.enabled else None


def exit_code_for(verdicts: list[Verdict]) -> int:
    """0 if all positive, 1 if some test is not positive, 2 if the only
    shortfall is a positive-looking heuristic run that never converged.

    A heuristic witness is an actual point of the domain, so a non-positive
    value found by the heuristic is a genuine negative result.
    """
    if any(not v.is_positive for v in verdicts):
        return EXIT_NOT_POSITIVE
    if any(v.inconclusive for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def run_tests(R: CurvatureTensor, spec: CertifySpec) -> list[tuple[str, Verdict]]:
    out = []
    for test in spec.tests:
        if test == "nakano":
            v = nakano_test(R, spec.tolerance)
        elif test == "dual_nakano":
            v = dual_nakano_test(R, spec.tolerance)
        else:
            v = griffiths_test(
                R,
                spec.tolerance,
                starts=spec.griffiths_starts,
                max_iters=spec.griffiths_max_iters,
                seed=spec.seed,
            )
        out.append((test, v))
    return out


def certify(spec: CertifySpec, timings: bool = False) -> Report:
    timer = Timer(timings)
    with timer.block("evaluate"):
        R = evaluate_expr(spec.bundle)
    with timer.block("tests"):
        results = run_tests(R, spec)
    verdicts = [v for _, v in results]
    return Report(
        kind="certify",
        seed=spec.seed,
        subject={"base_dim": R.base_dim, "rank": R.rank, "tolerance": spec.tolerance},
        spec_digest=spec_digest(spec),
        verdicts=[verdict_to_dict(t, v) for t, v in results],
        exit_code=exit_code_for(verdicts),
        timings=timer.result(),
    )
