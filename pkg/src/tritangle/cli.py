"""Command-line surface: compute, bound, simulate, noise-scan, verify.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 internal
inconsistency.  Every randomized command is a deterministic function of
--seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .errors import InternalInconsistency, TritangleError
from .noise import NoiseSpec, deviation_scan
from .protocol import tau_from_protocol
from .states import PureState, canonical_state, load_state, random_pure
from .tangle import TangleReport, tau
from .verify import report_json, run_all_suites

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_INCONSISTENT = 3


@dataclass
class RunConfig:
    command: str
    state: str | None = None
    n: int = 2
    seed: int = 0
    shots: int = 1_000_000
    tol: float = 1e-8
    search: bool = False
    eps: list | None = None
    fmt: str = "json"
    out: str | None = None
    trials: int | None = None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tritangle",
        description="Genuine tripartite entanglement of (2 x 2 x n) pure states: "
        "exact values, measurable bounds, two-copy protocol simulation, noise scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, state=True):
        if state:
            p.add_argument(
                "--state",
                required=True,
                help="canonical name (ghz, w, product, gghz:<theta>, random) or JSON file path",
            )
            p.add_argument("--n", type=int, default=2, help="C dimension for --state random")
        p.add_argument("--seed", type=int, default=0, help="seed for anything randomized")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="write output here instead of stdout")

    p_compute = sub.add_parser("compute", help="exact monotone, spectrum, and all bounds")
    add_common(p_compute)

    p_bound = sub.add_parser("bound", help="only the measurable lower bounds")
    add_common(p_bound)

    p_sim = sub.add_parser("simulate", help="finite-shot two-copy protocol run")
    add_common(p_sim)
    p_sim.add_argument("--shots", type=int, default=1_000_000, help="shots per setting")
    p_sim.add_argument("--search", action="store_true", help="find the basis by seeded search")
    p_sim.add_argument("--tol", type=float, default=1e-8, help="search convergence threshold")

    p_scan = sub.add_parser("noise-scan", help="monotone deviation against noise strength")
    add_common(p_scan)
    p_scan.add_argument(
        "--eps", required=True, help="comma-separated noise strengths in [0, 0.2]"
    )

    p_verify = sub.add_parser("verify", help="run the self-verification suites")
    add_common(p_verify, state=False)
    p_verify.add_argument("--trials", type=int, default=None, help="override ensemble sizes")

    return parser


def _resolve_state(cfg: RunConfig) -> PureState:
    name = cfg.state.strip()
    key = name.lower()
    if key in ("ghz", "w", "product"):
        return canonical_state(key)
    if key.startswith("gghz:"):
        try:
            theta = float(key.split(":", 1)[1])
        except ValueError as exc:
            raise TritangleError(f"bad gghz angle in {name!r}") from exc
        return canonical_state("gghz", theta=theta)
    if key == "random":
        return random_pure(cfg.n, cfg.seed)
    return load_state(name)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")


def _report_text(report: TangleReport, fmt: str) -> str:
    if fmt == "csv":
        return report.CSV_HEADER + "\n" + report.csv_row()
    return report.to_json()


def cmd_compute(cfg: RunConfig) -> int:
    report = tau(_resolve_state(cfg))
    _emit(_report_text(report, cfg.fmt), cfg.out)
    return EXIT_OK


def cmd_bound(cfg: RunConfig) -> int:
    report = tau(_resolve_state(cfg))
    data = {"n": report.n, "tau": report.tau, "bounds": report.to_dict()["bounds"]}
    if cfg.fmt == "csv":
        header = "n,tau,bound_spectral,bound_sigma_u,q_star,bound_qubit_det"
        det = "" if report.bound_qubit_det is None else f"{report.bound_qubit_det:.7g}"
        row = (
            f"{report.n},{report.tau:.7g},{report.bound_spectral:.7g},"
            f"{report.bound_sigma_u:.7g},{report.q_star:.7g},{det}"
        )
        _emit(header + "\n" + row, cfg.out)
    else:
        _emit(json.dumps(data, indent=2, sort_keys=True), cfg.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    state = _resolve_state(cfg)
    _, report = tau_from_protocol(
        state, cfg.shots, cfg.seed, use_search=cfg.search, tol=cfg.tol
    )
    if cfg.fmt == "csv":
        lines = ["i,j,counts,shots,p_hat,m_abs_hat,std_err"]
        for i, j, est in report.settings:
            lines.append(
                f"{i},{j},{est.counts},{est.shots},{est.p_hat:.10g},"
                f"{est.m_abs_hat:.10g},{est.std_err:.10g}"
            )
        _emit("\n".join(lines), cfg.out)
    else:
        _emit(report.to_json(), cfg.out)
    return EXIT_OK


def cmd_noise_scan(cfg: RunConfig) -> int:
    state = _resolve_state(cfg)
    spec = NoiseSpec.for_state(state)
    result = deviation_scan(state, spec, cfg.eps, seed=cfg.seed)
    if cfg.fmt == "csv":
        _emit(result.rows_csv(), cfg.out)
        if cfg.out is not None:
            # rows went to the file; keep the fit summary on stdout
            print(json.dumps(result.to_dict()["fit"], indent=2, sort_keys=True))
    else:
        _emit(result.to_json(), cfg.out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    results = run_all_suites(seed=cfg.seed, trials=cfg.trials)
    if cfg.fmt == "json":
        _emit(report_json(results), cfg.out)
    else:
        _emit("\n".join(r.line() for r in results), cfg.out)
    if all(r.passed for r in results):
        if cfg.fmt != "json" or cfg.out is not None:
            print("ALL SUITES PASSED")
        return EXIT_OK
    print("VERIFICATION FAILED", file=sys.stderr)
    return EXIT_VERIFY_FAILED


def _parse_eps(text: str) -> list:
    try:
        values = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise TritangleError(f"bad --eps list {text!r}") from exc
    if not values:
        raise TritangleError("--eps list is empty")
    return values


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        state=getattr(args, "state", None),
        n=getattr(args, "n", 2),
        seed=args.seed,
        shots=getattr(args, "shots", 1_000_000),
        tol=getattr(args, "tol", 1e-8),
        search=getattr(args, "search", False),
        fmt=args.fmt,
        out=args.out,
        trials=getattr(args, "trials", None),
    )
    try:
        if cfg.command == "compute":
            return cmd_compute(cfg)
        if cfg.command == "bound":
            return cmd_bound(cfg)
        if cfg.command == "simulate":
            return cmd_simulate(cfg)
        if cfg.command == "noise-scan":
            cfg.eps = _parse_eps(args.eps)
            return cmd_noise_scan(cfg)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        raise TritangleError(f"unknown command {cfg.command!r}")
    except InternalInconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except TritangleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
