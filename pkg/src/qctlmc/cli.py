"""Command line interface: ``qctlmc check|gen|batch|selftest``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields

from . import bench
from .formula import to_text
from .kripke import KripkeError, serialize_kripke
from .parser import FormulaSyntaxError
from .pipeline import EXIT_CODES, EXIT_ERROR, CheckConfig, PipelineError, default_solver, run_check
from .qbf import QbfError
from .reduce import ReductionError, STRATEGIES
from .rewrite import NotPrenexError

USER_ERRORS = (OSError, KripkeError, FormulaSyntaxError, PipelineError, QbfError, ReductionError,
               NotPrenexError, bench.BenchError, ValueError)


def _add_check_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kripke", required=True, help="structure file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--formula", help="formula file")
    g.add_argument("--formula-text", help="formula given inline")
    p.add_argument("--init", help="initial state (default: the structure's init)")
    p.add_argument("--strategy", choices=STRATEGIES, default="fp")
    p.add_argument("--bound", type=int, help="until bound for strategy x")
    p.add_argument("--exists1", choices=("prop", "bits", "onehot"))
    p.add_argument("--emit", nargs=2, metavar=("FORMAT", "PATH"), help="write the QBF as smt2 or qdimacs")
    p.add_argument("--solver", help="internal or exec:CMD (default from $QCTLMC_SOLVER, else internal)")
    p.add_argument("--timeout", type=float, help="external solver timeout in seconds")
    p.add_argument("--stats", action="store_true", help="print the run report")


def _config_from_args(a: argparse.Namespace) -> CheckConfig:
    emit_format, emit_path = (a.emit if a.emit else (None, None))
    if emit_format not in (None, "smt2", "qdimacs"):
        raise PipelineError(f"unknown emission format {emit_format!r}")
    return CheckConfig(
        kripke_path=a.kripke, formula_path=a.formula, formula_text=a.formula_text, init=a.init,
        strategy=a.strategy, solver=a.solver or default_solver(), bound=a.bound, exists1=a.exists1,
        emit_format=emit_format, emit_path=emit_path, timeout=a.timeout,
    )


def cmd_check(a: argparse.Namespace) -> int:
    report = run_check(_config_from_args(a))
    print(report.verdict)
    if a.stats:
        for k, v in report.as_dict().items():
            if isinstance(v, float):
                v = f"{v:.4f}"
            print(f"{k}: {v}")
    return EXIT_CODES[report.verdict]


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(a: argparse.Namespace) -> int:
    if a.family == "kconn":
        K, _, _ = bench.gen_kconn(a.n, a.m)
        f = bench.kconn_formula(a.variant, a.k, a.reading) if a.k else None
    elif a.family == "nim":
        K, _ = bench.gen_nim(a.heaps, a.player)
        f = bench.nim_formula(a.player)
    else:
        K, _ = bench.gen_resources(a.n, a.cols)
        f = bench.resources_formula(a.k, a.d) if a.k else None
    _write(serialize_kripke(K), a.out)
    if f is not None and a.formula_out:
        _write(to_text(f) + "\n", a.formula_out)
    return 0


def _batch_job(spec: dict) -> dict:
    known = {f.name for f in fields(CheckConfig)}
    unknown = set(spec) - known
    if unknown:
        return {"error": f"unknown job keys {sorted(unknown)}"}
    try:
        return run_check(CheckConfig(**spec)).as_dict()
    except USER_ERRORS as e:
        return {"error": str(e)}


def cmd_batch(a: argparse.Namespace) -> int:
    """Run JSON-lines jobs (CheckConfig fields) in parallel worker processes."""
    with open(a.jobs) as fh:
        specs = [json.loads(line) for line in fh if line.strip()]
    default = default_solver()
    for s in specs:
        s.setdefault("solver", default)
    with ProcessPoolExecutor(max_workers=a.workers) as pool:
        results = list(pool.map(_batch_job, specs))
    worst = 0
    for i, r in enumerate(results):
        r = {"job": i, **r}
        print(json.dumps(r, sort_keys=True))
        code = EXIT_ERROR if "error" in r else EXIT_CODES[r["verdict"]]
        worst = max(worst, code)
    return worst


def cmd_selftest(a: argparse.Namespace) -> int:
    from .selftest import run_selftest

    ok = run_selftest(a.jobs, a.seed, out=sys.stdout)
    return 0 if ok else 1


class _Parser(argparse.ArgumentParser):
    # exit status 2 means "unknown" here, so usage errors use the error code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qctlmc", description="QCTL model checking through QBF")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check one formula at one state")
    _add_check_args(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate a benchmark structure")
    gsub = p.add_subparsers(dest="family", required=True)
    g = gsub.add_parser("kconn")
    g.add_argument("n", type=int)
    g.add_argument("m", type=int)
    g.add_argument("--k", type=int, help="also build the k-connectivity formula")
    g.add_argument("--variant", choices=bench.KCONN_VARIANTS, default="psi")
    g.add_argument("--reading", choices=bench.KCONN_READINGS, default="as-printed")
    g = gsub.add_parser("nim")
    g.add_argument("heaps", type=int, nargs="+")
    g.add_argument("--player", type=int, choices=(1, 2), default=1)
    g = gsub.add_parser("resources")
    g.add_argument("n", type=int)
    g.add_argument("cols", type=int)
    g.add_argument("--k", type=int, help="number of resources for the formula")
    g.add_argument("--d", type=int, default=1, help="distance for the formula")
    for g in gsub.choices.values():
        g.add_argument("--out", "-o", help="structure output file (default stdout)")
        g.add_argument("--formula-out", help="write the matching formula here")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("batch", help="run JSON-lines jobs concurrently")
    p.add_argument("jobs", help="file with one JSON object per line")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("selftest", help="differential check of all strategies against the oracle")
    p.add_argument("--jobs", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except USER_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
