import os
import shutil
import sys

import pytest

from qctlmc import parse_kripke

sys.setrecursionlimit(20000)

K1_TEXT = "states: v1 v2\nedges: v1->v2 v2->v2\nlabel v1: a\nlabel v2: b"


@pytest.fixture
def K1():
    return parse_kripke(K1_TEXT)


def external_solver_command():
    """Solver command for the external tier: $QCTLMC_SOLVER, else z3 if installed."""
    cmd = os.environ.get("QCTLMC_SOLVER", "").strip()
    if cmd:
        return cmd
    if shutil.which("z3"):
        return "z3"
    return None


@pytest.fixture
def solver_cmd():
    cmd = external_solver_command()
    if cmd is None:
        pytest.skip("no external solver configured")
    return cmd
