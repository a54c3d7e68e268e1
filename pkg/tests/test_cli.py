import json
import random
import subprocess
import sys

import pytest

from conftest import K1_TEXT
from qctlmc.bench import gen_kconn, kconn_formula
from qctlmc.cli import main
from qctlmc.kripke import parse_kripke, serialize_kripke
from qctlmc.pipeline import (
    CheckConfig, ExternalSolverError, PipelineError, classify_output, default_solver, emit,
    invoke_external_solver, run_check,
)
from qctlmc.qbf import check_validity, emit_smtlib, q_exists, q_forall, q_iff, var
from qctlmc.randgen import random_job
from qctlmc.reduce import ReductionJob, reduce


@pytest.fixture
def k1_file(tmp_path):
    path = tmp_path / "k1.kripke"
    path.write_text(K1_TEXT + "\ninit: v1\n")
    return str(path)


# -- run_check ---------------------------------------------------------------------------


def test_run_check_k1(k1_file):
    r = run_check(CheckConfig(kripke_path=k1_file, formula_text="EX b", init="v1", strategy="uu"))
    assert r.verdict == "holds" and r.solver == "internal"
    assert r.qbf_size == 1 and r.qbf_vars == 0


def test_run_check_fails(k1_file):
    r = run_check(CheckConfig(kripke_path=k1_file, formula_text="AG a", strategy="fp"))
    assert r.verdict == "fails"


def test_run_check_kconn_psi2():
    K, x, _ = gen_kconn(3, 2)
    r = run_check(CheckConfig(structure=K, init=x, formula=kconn_formula("psi", 2), strategy="fp"))
    assert r.verdict == "holds"


def test_bounded_unsat_is_unknown():
    from qctlmc.bench import gen_nim, nim_formula
    K, x = gen_nim([2, 2], 1)
    r = run_check(CheckConfig(structure=K, init=x, formula=nim_formula(1), strategy="x", bound=6))
    assert r.verdict == "unknown" and r.bound == 6


def test_emit_deterministic(k1_file, tmp_path):
    for fmt in ("smt2", "qdimacs"):
        texts = []
        for i in range(2):
            out = tmp_path / f"q{i}.{fmt}"
            run_check(CheckConfig(kripke_path=k1_file, formula_text="E[a U b]", strategy="x",
                                  emit_format=fmt, emit_path=str(out)))
            texts.append(out.read_bytes())
        assert texts[0] == texts[1] and texts[0]


def test_emit_refuses_open_formula():
    with pytest.raises(PipelineError, match="open formula"):
        emit(var("p@v1"), "smt2")
    with pytest.raises(PipelineError):
        emit(q_exists(["x"], var("x")), "dimacs")


def test_default_solver(monkeypatch):
    monkeypatch.delenv("QCTLMC_SOLVER", raising=False)
    assert default_solver() == "internal"
    monkeypatch.setenv("QCTLMC_SOLVER", "z3 -T:5")
    assert default_solver() == "exec:z3 -T:5"


# -- external solver plumbing ------------------------------------------------------------------


@pytest.mark.parametrize("out, code, want", [
    ("sat\n", 0, "satisfiable"),
    ("unsat\n", 0, "unsatisfiable"),
    ("unknown\n", 0, "unknown"),
    ("c comment\ns cnf 1\n", 10, "satisfiable"),
    ("s cnf 0\n", 20, "unsatisfiable"),
    ("", 10, "satisfiable"),
    ("", 20, "unsatisfiable"),
])
def test_classify_output(out, code, want):
    assert classify_output(out, code) == want


def test_classify_garbage():
    with pytest.raises(ExternalSolverError):
        classify_output("segmentation fault", 139)


def _fake_solver(tmp_path, body):
    script = tmp_path / "fake.py"
    script.write_text("import sys, time\n" + body)
    return f"{sys.executable} {script}"


def test_invoke_fake_solver(tmp_path):
    target = tmp_path / "x.smt2"
    target.write_text("(check-sat)\n")
    cmd = _fake_solver(tmp_path, "print('sat' if open(sys.argv[1]).read() else 'unsat')\n")
    assert invoke_external_solver(cmd, str(target)) == "satisfiable"
    cmd = _fake_solver(tmp_path, "print('unsat', sys.argv[1])\n")
    assert invoke_external_solver(cmd + " {} --flag", str(target)) == "unsatisfiable"


def test_invoke_timeout_is_unknown(tmp_path):
    cmd = _fake_solver(tmp_path, "time.sleep(5)\n")
    assert invoke_external_solver(cmd, str(tmp_path / "x"), timeout=0.3) == "unknown"


def test_invoke_errors(tmp_path):
    with pytest.raises(ExternalSolverError, match="cannot start"):
        invoke_external_solver("/nonexistent/solver", str(tmp_path / "x"))
    cmd = _fake_solver(tmp_path, "sys.exit(1)\n")
    with pytest.raises(ExternalSolverError):
        invoke_external_solver(cmd, str(tmp_path / "x"))


def test_external_examples(solver_cmd, tmp_path):
    p = tmp_path / "a.smt2"
    p.write_text(emit_smtlib(q_exists(["x"], q_forall(["y"], q_iff(var("x"), var("y"))))))
    assert invoke_external_solver(solver_cmd, str(p), timeout=60) == "unsatisfiable"


def test_external_agrees_on_reductions(solver_cmd, tmp_path):
    rng = random.Random(3)
    for i in range(50):
        job = random_job(rng, prenex=True)
        strategy = ("uu", "fp", "fpf", "x")[i % 4]
        q = reduce(ReductionJob(job.structure, job.initial, job.formula, strategy))
        p = tmp_path / f"j{i}.smt2"
        p.write_text(emit(q, "smt2"))
        want = "satisfiable" if check_validity(q) else "unsatisfiable"
        assert invoke_external_solver(solver_cmd, str(p), timeout=60) == want


def test_run_check_external(solver_cmd, k1_file):
    r = run_check(CheckConfig(kripke_path=k1_file, formula_text="E[a U b]", strategy="fpf",
                              solver=f"exec:{solver_cmd}"))
    assert r.verdict == "holds" and r.solver.startswith("external")


# -- command line ---------------------------------------------------------------------------


def test_cli_check_exit_codes(k1_file, capsys):
    assert main(["check", "--kripke", k1_file, "--formula-text", "EX b", "--strategy", "uu",
                 "--solver", "internal"]) == 0
    assert capsys.readouterr().out.startswith("holds")
    assert main(["check", "--kripke", k1_file, "--formula-text", "AG a", "--solver", "internal"]) == 1
    assert main(["check", "--kripke", k1_file, "--formula-text", "AG (", "--solver", "internal"]) == 3
    assert "error" in capsys.readouterr().err
    assert main(["check", "--kripke", k1_file, "--formula-text", "EX exists p. p", "--strategy", "x",
                 "--solver", "internal"]) == 3


def test_cli_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check", "--strategy", "qq"])
    assert info.value.code == 3


def test_cli_stats(k1_file, capsys):
    assert main(["check", "--kripke", k1_file, "--formula-text", "E[a U b]", "--strategy", "x",
                 "--solver", "internal", "--stats"]) == 0
    out = capsys.readouterr().out
    for key in ("build_time", "qbf_size", "qbf_vars", "solve_time", "solver"):
        assert f"{key}:" in out


def test_cli_formula_file_and_emit(k1_file, tmp_path, capsys):
    ff = tmp_path / "f.qctl"
    ff.write_text("AG EF b\n")
    out = tmp_path / "o.qdimacs"
    assert main(["check", "--kripke", k1_file, "--formula", str(ff), "--strategy", "fpf",
                 "--emit", "qdimacs", str(out), "--solver", "internal"]) == 0
    assert out.read_text().startswith("p cnf ")


def test_cli_gen(tmp_path, capsys):
    out, fout = tmp_path / "k.kripke", tmp_path / "k.qctl"
    assert main(["gen", "kconn", "3", "2", "--k", "2", "-o", str(out), "--formula-out", str(fout)]) == 0
    K = parse_kripke(out.read_text())
    assert len(K) == 18 and K.init == "q_1_1"
    assert fout.read_text().strip() == "forall1 p1. EX E[!p1 U y]"
    assert main(["gen", "nim", "3", "2"]) == 0
    assert len(parse_kripke(capsys.readouterr().out)) == 31
    assert main(["gen", "resources", "10", "5"]) == 0
    assert len(parse_kripke(capsys.readouterr().out)) == 50
    assert main(["gen", "kconn", "3", "9"]) == 3


def test_cli_batch(k1_file, tmp_path, capsys):
    jobs = tmp_path / "jobs.jsonl"
    jobs.write_text("\n".join(json.dumps(j) for j in [
        {"kripke_path": k1_file, "formula_text": "EX b", "strategy": "uu", "solver": "internal"},
        {"kripke_path": k1_file, "formula_text": "AG a", "strategy": "x", "solver": "internal"},
        {"kripke_path": k1_file, "formula_text": "EX b", "colour": "red"},
    ]) + "\n")
    code = main(["batch", str(jobs), "--workers", "2"])
    rows = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
    assert [r["job"] for r in rows] == [0, 1, 2]
    assert rows[0]["verdict"] == "holds" and rows[1]["verdict"] == "fails"
    assert "unknown job keys" in rows[2]["error"]
    assert code == 3


def test_cli_selftest(capsys):
    assert main(["selftest", "--jobs", "10", "--seed", "4"]) == 0
    assert "0 disagreements" in capsys.readouterr().out


def test_module_entry_point(k1_file):
    proc = subprocess.run([sys.executable, "-m", "qctlmc", "check", "--kripke", k1_file, "--formula-text",
                           "EX b", "--solver", "internal"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("holds")


def test_serialized_structure_checks_the_same(tmp_path):
    K, x, _ = gen_kconn(3, 2)
    path = tmp_path / "k.kripke"
    path.write_text(serialize_kripke(K))
    r = run_check(CheckConfig(kripke_path=str(path), init=x, formula_text="forall1 p1. EX E[!p1 U y]",
                              strategy="uu"))
    assert r.verdict == "holds"
