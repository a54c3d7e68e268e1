"""End-to-end checking: parse, reduce, solve, report."""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .formula import Formula
from .kripke import KripkeStructure, parse_kripke
from .parser import parse_formula
from .qbf import QbfError, SolverStats, check_validity, emit_qdimacs, emit_smtlib, simplify, to_prenex_cnf
from .qbf.ast import QNode, dag_size, quantified_vars
from .qbf.solver import DEFAULT_CEILING
from .reduce import ReductionJob, reduce

SOLVER_ENV = "QCTLMC_SOLVER"
HOLDS, FAILS, UNKNOWN = "holds", "fails", "unknown"
SATISFIABLE, UNSATISFIABLE = "satisfiable", "unsatisfiable"
EXIT_CODES = {HOLDS: 0, FAILS: 1, UNKNOWN: 2}
EXIT_ERROR = 3


class PipelineError(RuntimeError):
    pass


class ExternalSolverError(PipelineError):
    pass


@dataclass
class CheckConfig:
    """One model-checking job.

    The structure comes from ``kripke_path`` or an in-memory ``structure``;
    the formula from ``formula_path``, ``formula_text`` or ``formula``.
    ``solver`` is ``"internal"`` or ``"exec:<command>"``.
    """

    kripke_path: str | None = None
    formula_path: str | None = None
    formula_text: str | None = None
    init: str | None = None
    strategy: str = "fp"
    solver: str = "internal"
    bound: int | None = None
    exists1: str | None = None
    emit_format: str | None = None
    emit_path: str | None = None
    timeout: float | None = None
    ceiling: int = DEFAULT_CEILING
    structure: KripkeStructure | None = None
    formula: Formula | None = None


@dataclass
class RunReport:
    verdict: str
    strategy: str
    build_time: float
    qbf_size: int
    qbf_vars: int
    solve_time: float
    solver: str
    bound: int | None = None
    emitted_bytes: int | None = None
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


_EXISTS1_ALIASES = {"prop": "propositional", "bits": "bitvector"}


def _load(config: CheckConfig) -> tuple[KripkeStructure, str, Formula]:
    K = config.structure
    if K is None:
        if not config.kripke_path:
            raise PipelineError("no Kripke structure given")
        K = parse_kripke(Path(config.kripke_path).read_text())
    f = config.formula
    if f is None:
        if config.formula_text is not None:
            text = config.formula_text
        elif config.formula_path:
            text = Path(config.formula_path).read_text()
        else:
            raise PipelineError("no formula given")
        f = parse_formula(text)
    init = config.init or K.init
    if init is None:
        raise PipelineError("no initial state: pass one or declare 'init:' in the structure")
    return K, init, f


def emit(q: QNode, fmt: str) -> str:
    if q.free_vars:
        raise PipelineError(f"refusing to emit an open formula (free: {sorted(q.free_vars)[:5]})")
    if fmt == "smt2":
        return emit_smtlib(q)
    if fmt == "qdimacs":
        return emit_qdimacs(to_prenex_cnf(q)) + "\n"
    raise PipelineError(f"unknown emission format {fmt!r}")


def classify_output(stdout: str, returncode: int) -> str:
    """Map solver output to satisfiable / unsatisfiable / unknown."""
    for line in stdout.splitlines():
        tok = line.strip().split()
        if not tok:
            continue
        if tok[0] == "sat":
            return SATISFIABLE
        if tok[0] == "unsat":
            return UNSATISFIABLE
        if tok[0] == "unknown":
            return "unknown"
        if tok[0] == "s" and len(tok) >= 3 and tok[1] == "cnf":
            return {"1": SATISFIABLE, "0": UNSATISFIABLE}.get(tok[2], "unknown")
        if tok[0] in ("s", "c"):
            continue
        break
    if returncode == 10:
        return SATISFIABLE
    if returncode == 20:
        return UNSATISFIABLE
    raise ExternalSolverError(f"cannot classify solver output (exit {returncode}): {stdout[:200]!r}")


def invoke_external_solver(command: str, script_path: str, timeout: float | None = None) -> str:
    """Run ``command`` on a script and classify its answer.

    ``{}`` in the command is replaced by the script path; otherwise the path
    is appended as the last argument.
    """
    argv = shlex.split(command)
    if not argv:
        raise ExternalSolverError("empty solver command")
    if "{}" in argv:
        argv = [script_path if a == "{}" else a for a in argv]
    else:
        argv.append(script_path)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return "unknown"
    except OSError as e:
        raise ExternalSolverError(f"cannot start solver {argv[0]!r}: {e}") from e
    verdict = classify_output(proc.stdout, proc.returncode)
    if proc.returncode not in (0, 10, 20) and verdict == "unknown":
        raise ExternalSolverError(f"solver exited with status {proc.returncode}: {proc.stderr.strip()[:200]}")
    return verdict


def default_solver() -> str:
    cmd = os.environ.get(SOLVER_ENV, "").strip()
    return f"exec:{cmd}" if cmd else "internal"


def build_qbf(K: KripkeStructure, init: str, f: Formula, strategy: str, bound: int | None = None,
              exists1: str | None = None) -> QNode:
    mode = _EXISTS1_ALIASES.get(exists1, exists1)
    return simplify(reduce(ReductionJob(K, init, f, strategy, until_bound=bound, exists1_mode=mode)))


def run_check(config: CheckConfig) -> RunReport:
    K, init, f = _load(config)
    t0 = time.perf_counter()
    q = build_qbf(K, init, f, config.strategy, config.bound, config.exists1)
    build_time = time.perf_counter() - t0

    notes = []
    text = None
    fmt = config.emit_format or ("smt2" if config.emit_path else None)
    if config.emit_path:
        text = emit(q, fmt)
        Path(config.emit_path).write_text(text)

    t1 = time.perf_counter()
    if config.solver == "internal":
        stats = SolverStats()
        valid = check_validity(q, ceiling=config.ceiling, stats=stats)
        answer = SATISFIABLE if valid else UNSATISFIABLE
        notes.append(f"sat calls {stats.sat_calls}, refinements {stats.refinements}")
        solver = "internal"
    elif config.solver.startswith("exec:"):
        command = config.solver[len("exec:"):]
        script_fmt = fmt or "smt2"
        if text is None:
            text = emit(q, script_fmt)
        suffix = ".smt2" if script_fmt == "smt2" else ".qdimacs"
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "query" + suffix)
            Path(path).write_text(text)
            answer = invoke_external_solver(command, path, config.timeout)
        solver = f"external({command})"
    else:
        raise PipelineError(f"unknown solver {config.solver!r}")
    solve_time = time.perf_counter() - t1

    if answer == SATISFIABLE:
        verdict = HOLDS
    elif answer == UNSATISFIABLE:
        # a bounded counter can miss long paths, so a negative answer is inconclusive
        verdict = UNKNOWN if config.bound is not None else FAILS
    else:
        verdict = UNKNOWN
    return RunReport(
        verdict=verdict,
        strategy=config.strategy,
        build_time=build_time,
        qbf_size=dag_size(q),
        qbf_vars=len(quantified_vars(q)),
        solve_time=solve_time,
        solver=solver,
        bound=config.bound,
        emitted_bytes=len(text.encode()) if text is not None else None,
        notes=notes,
    )


__all__ = [
    "CheckConfig", "RunReport", "run_check", "invoke_external_solver", "classify_output",
    "emit", "build_qbf", "default_solver", "PipelineError", "ExternalSolverError", "QbfError",
]
