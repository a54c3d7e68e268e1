"""Solver-facing output: prenex CNF, QDIMACS and SMT-LIB2."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ast import QAnd, QConst, QIff, QImplies, QNode, QNot, QOr, QQuant, QVar, QbfError
from .solver import Prenexer, Tseitin


@dataclass
class PrenexCnf:
    prefix: list  # [("a" | "e", [int, ...]), ...] outermost first
    clauses: list  # [[int, ...], ...]
    names: dict = field(default_factory=dict)  # variable name -> int

    @property
    def num_vars(self) -> int:
        used = [abs(l) for c in self.clauses for l in c]
        used += [v for _, vs in self.prefix for v in vs]
        return max(used, default=0)

    def name_of(self) -> dict[int, str]:
        return {i: n for n, i in self.names.items()}


def to_prenex_cnf(f: QNode) -> PrenexCnf:
    """Prenex the quantifiers, Tseitin-encode the matrix.

    Tseitin auxiliaries go into an innermost existential block. The formula
    is not simplified first; a top-level literal becomes a unit clause.
    """
    if f.free_vars:
        raise QbfError("to_prenex_cnf needs a closed formula")
    first = f.exists if isinstance(f, QQuant) else True
    blocks, matrix = Prenexer(first).run(f)
    blocks = [(e, vs) for e, vs in blocks if vs]
    enc = Tseitin()
    for _, vs in blocks:
        for v in vs:
            enc.var_id(v)
    n_orig = enc.next_id - 1
    if isinstance(matrix, QConst):
        clauses = [] if matrix.value else [[]]
    else:
        root = enc.lit(matrix)
        clauses = list(enc.clauses) + [[root]]
    prefix = [("e" if e else "a", [enc.ids[v] for v in vs]) for e, vs in blocks]
    aux = list(range(n_orig + 1, enc.next_id))
    if aux:
        if prefix and prefix[-1][0] == "e":
            prefix[-1] = ("e", prefix[-1][1] + aux)
        else:
            prefix.append(("e", aux))
    names = {v: enc.ids[v] for _, vs in blocks for v in vs}
    return PrenexCnf(prefix, clauses, names)


def emit_qdimacs(p: PrenexCnf) -> str:
    lines = [f"p cnf {p.num_vars} {len(p.clauses)}"]
    for q, vs in p.prefix:
        if vs:
            lines.append(f"{q} {' '.join(map(str, vs))} 0")
    for c in p.clauses:
        lines.append(" ".join(map(str, c + [0])))
    return "\n".join(lines)


_SIMPLE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def smt_symbol(name: str) -> str:
    if "|" in name or "\\" in name:
        raise QbfError(f"variable name {name!r} cannot be quoted in SMT-LIB")
    return f"|{name}|"


def smt_term(f: QNode) -> str:
    out: list[str] = []
    # explicit stack: items are nodes or literal strings
    stack: list = [f]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        n = item
        if isinstance(n, QConst):
            out.append("true" if n.value else "false")
        elif isinstance(n, QVar):
            out.append(smt_symbol(n.name))
        elif isinstance(n, QQuant):
            q = "exists" if n.exists else "forall"
            binds = " ".join(f"({smt_symbol(v)} Bool)" for v in n.vars)
            out.append(f"({q} ({binds}) ")
            stack.append(")")
            stack.append(n.body)
        else:
            op = {QNot: "not", QAnd: "and", QOr: "or", QImplies: "=>", QIff: "="}[type(n)]
            out.append(f"({op}")
            stack.append(")")
            for c in reversed(n.children()):
                stack.append(c)
                stack.append(" ")
    return "".join(out)


def emit_smtlib(f: QNode) -> str:
    """SMT-LIB2 script whose satisfiability is the validity of ``f``."""
    if f.free_vars:
        raise QbfError("emit_smtlib needs a closed formula (free variables "
                       f"{sorted(f.free_vars)[:5]})")
    return "\n".join([
        "(set-logic ALL)",
        f"(assert {smt_term(f)})",
        "(check-sat)",
        "",
    ])
