"""Self-verification suites over seeded random ensembles.

Each suite checks one structural identity of the toolkit: the spectral
equivalence between the overlap-matrix and spin-flip routes, the optimal
basis diagonalizing all coincidences, Takagi reconstruction, lower-bound
dominance, and the constancy of the trace-identity factor.  The suites are
deterministic functions of their seeds, so a pass report is reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import TritangleError
from .linalg import haar_unitary, takagi
from .protocol import off_diagonal_signal, optimal_basis, verify_trace_identity
from .states import random_pure
from .tangle import (
    bound_qubit_det,
    bound_sigma_u,
    bound_spectral,
    build_m,
    lambda_spectrum,
    tau,
)

__all__ = [
    "SuiteResult",
    "lemma_suite",
    "theorem_suite",
    "takagi_suite",
    "dominance_suite",
    "trace_factor_suite",
    "run_all_suites",
]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = " ".join(f"{k}={v}" for k, v in self.detail.items())
        return f"{status}  {self.name:<28s} {info}"


def _guard(name: str, fn) -> SuiteResult:
    try:
        return fn()
    except TritangleError as exc:
        return SuiteResult(name=name, passed=False, detail={"error": repr(exc)})


def lemma_suite(seed: int = 0, trials: int = 500, dims=(2, 3, 5, 8), tol: float = 1e-8) -> SuiteResult:
    """Overlap-matrix singular values vs spin-flip eigenvalue square roots,
    with the Hermitian construction as a third independent route."""

    def run():
        worst = 0.0
        for n in dims:
            for t in range(trials):
                s = random_pure(n, seed * 1_000_003 + 7919 * n + t)
                lam_m = lambda_spectrum(s, "via_M").lam
                lam_r = lambda_spectrum(s, "via_R").lam
                lam_h = lambda_spectrum(s, "via_hermitian").lam
                worst = max(
                    worst,
                    float(np.abs(lam_m - lam_r).max()),
                    float(np.abs(lam_m - lam_h).max()),
                )
        return SuiteResult(
            name="spectral-equivalence",
            passed=worst < tol,
            detail={"max_deviation": f"{worst:.3e}", "tol": f"{tol:.0e}"},
        )

    return _guard("spectral-equivalence", run)


def theorem_suite(seed: int = 1, trials: int = 200, dims=(2, 3, 5), tol: float = 1e-9) -> SuiteResult:
    """Optimal basis: vanishing cross-coincidences, diagonal equals spectrum."""
    from .protocol import TwoCopyObservable, expectation

    def run():
        per_dim = max(1, trials // len(dims))
        worst_sig = 0.0
        worst_diag = 0.0
        for n in dims:
            for t in range(per_dim):
                s = random_pure(n, seed * 2_000_003 + 104729 * n + t)
                basis = optimal_basis(s)
                worst_sig = max(worst_sig, off_diagonal_signal(s, basis))
                diag = [
                    2.0 * np.sqrt(expectation(s, TwoCopyObservable(basis, basis, i, i)))
                    for i in range(n)
                ]
                diag = np.sort(np.asarray(diag))[::-1]
                diag = np.concatenate([diag[:4], np.zeros(max(0, 4 - diag.size))])
                worst_diag = max(worst_diag, float(np.abs(diag - lambda_spectrum(s).lam).max()))
        return SuiteResult(
            name="optimal-basis",
            passed=worst_sig < tol and worst_diag < tol,
            detail={"max_offdiag": f"{worst_sig:.3e}", "max_diag_dev": f"{worst_diag:.3e}"},
        )

    return _guard("optimal-basis", run)


def random_symmetric(dim: int, rng: np.random.Generator, degenerate: bool = False) -> np.ndarray:
    """Random complex symmetric matrix; optionally with exactly repeated
    singular values (built as U diag U^T from a Haar unitary)."""
    if degenerate:
        u = haar_unitary(dim, rng)
        base = rng.uniform(0.2, 1.0, size=max(1, (dim + 1) // 2))
        lam = np.repeat(base, 2)[:dim]
        if rng.uniform() < 0.5:
            lam[-1] = 0.0  # mix a zero singular value into the repeats
        lam = np.sort(lam)[::-1]
        return (u * lam) @ u.T
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (z + z.T)


def takagi_suite(seed: int = 2, trials: int = 1000, max_dim: int = 8) -> SuiteResult:
    """Reconstruction u diag(lam) u^T == input and unitarity of u."""

    def run():
        rng = np.random.default_rng(seed)
        worst_rec = 0.0
        worst_uni = 0.0
        for t in range(trials):
            dim = 2 + t % (max_dim - 1)
            m = random_symmetric(dim, rng, degenerate=(t % 3 == 0))
            f = takagi(m)
            denom = max(np.linalg.norm(m), 1e-30)
            worst_rec = max(worst_rec, float(np.linalg.norm(f.reconstruct() - m) / denom))
            worst_uni = max(
                worst_uni, float(np.linalg.norm(f.u @ f.u.conj().T - np.eye(dim)))
            )
        return SuiteResult(
            name="takagi-reconstruction",
            passed=worst_rec < 1e-9 and worst_uni < 1e-10,
            detail={"max_rel_residual": f"{worst_rec:.3e}", "max_unitarity": f"{worst_uni:.3e}"},
        )

    return _guard("takagi-reconstruction", run)


def dominance_suite(seed: int = 3, trials: int = 1000, dims=(2, 3, 5, 8)) -> SuiteResult:
    """bound_sigma_u <= bound_spectral <= tau, and the n = 2 determinant
    identity 2 sqrt(|det M|) == tau."""

    def run():
        violations = 0
        worst_det = 0.0
        per_dim = max(1, trials // len(dims))
        for n in dims:
            for t in range(per_dim):
                s = random_pure(n, seed * 3_000_017 + 15485863 * n + t)
                rep = tau(s)
                b_su, _ = bound_sigma_u(build_m(s))
                b_sp = bound_spectral(rep.lam)
                if not (b_su <= b_sp + 1e-9 and b_sp <= rep.tau + 1e-9):
                    violations += 1
                if n == 2:
                    exact, modb = bound_qubit_det(build_m(s))
                    worst_det = max(worst_det, abs(exact - rep.tau))
                    if modb > exact + 1e-12:
                        violations += 1
        return SuiteResult(
            name="bound-dominance",
            passed=violations == 0 and worst_det < 1e-9,
            detail={"violations": violations, "max_det_dev": f"{worst_det:.3e}"},
        )

    return _guard("bound-dominance", run)


def trace_factor_suite(seed: int = 4, trials: int = 100, tol: float = 1e-9) -> SuiteResult:
    """The ratio sum|M_ij|^2 over the two-copy singlet coincidence trace is a
    state-independent constant (its value is part of the report)."""

    def run():
        factors = []
        for t in range(trials):
            n = 2 + t % 4
            s = random_pure(n, seed * 4_000_037 + 32452843 * n + t)
            ident = verify_trace_identity(s)
            factors.append(ident.factor)
        factors = np.asarray(factors)
        spread = float(factors.max() - factors.min())
        return SuiteResult(
            name="trace-identity-factor",
            passed=spread < tol,
            detail={"factor": f"{factors.mean():.9f}", "spread": f"{spread:.3e}"},
        )

    return _guard("trace-identity-factor", run)


def run_all_suites(seed: int = 0, trials: int | None = None) -> list[SuiteResult]:
    """Run every suite; ``trials`` overrides the per-suite ensemble sizes."""
    return [
        lemma_suite(seed=seed, trials=trials or 500),
        theorem_suite(seed=seed + 1, trials=trials or 200),
        takagi_suite(seed=seed + 2, trials=trials or 1000),
        dominance_suite(seed=seed + 3, trials=trials or 1000),
        trace_factor_suite(seed=seed + 4, trials=trials or 100),
    ]


def report_json(results: list[SuiteResult]) -> str:
    return json.dumps(
        {
            "suites": [
                {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results
            ],
            "all_passed": all(r.passed for r in results),
        },
        indent=2,
        sort_keys=True,
    )
