"""Internal validity checker for closed QBF.

Closed subformulas are decided separately and folded to constants. A
quantifier whose body is propositional is a single SAT call. Anything left
is put in prenex form and decided by counterexample-guided expansion: the
outer block proposes a move, the rest of the formula is checked against it,
and each refutation adds one instance of the inner block (a copy of the
matrix with the opponent's move substituted) to the abstraction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from pysat.solvers import Solver

from .ast import (
    BOT, TOP, QAnd, QConst, QIff, QImplies, QNode, QNot, QOr, QQuant, QVar, QbfError,
    q_conj, q_disj, q_implies, q_not, q_quant, q_and, q_or, rename, simplify, substitute, transform,
    _quant_literals,
)

DEFAULT_CEILING = 26
# refinements allowed once the static ceiling is exceeded
REFINEMENT_BUDGET = 300
SAT_BACKEND = "glucose4"


class InternalScaleError(QbfError):
    pass


# -- CNF ------------------------------------------------------------------------


class Tseitin:
    """Incremental Tseitin encoder over a shared variable numbering."""

    def __init__(self):
        self.ids: dict[str, int] = {}
        self.next_id = 1
        self.clauses: list[list[int]] = []
        self._lit: dict[int, int] = {}
        self._keep: list[QNode] = []

    def var_id(self, name: str) -> int:
        i = self.ids.get(name)
        if i is None:
            i = self.ids[name] = self.next_id
            self.next_id += 1
        return i

    def fresh(self) -> int:
        i = self.next_id
        self.next_id += 1
        return i

    def lit(self, root: QNode) -> int:
        memo = self._lit
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if id(node) in memo:
                continue
            if isinstance(node, QVar):
                memo[id(node)] = self.var_id(node.name)
                self._keep.append(node)
                continue
            if isinstance(node, QQuant):
                raise QbfError("quantifier inside a propositional matrix")
            kids = node.children()
            if not done:
                stack.append((node, True))
                stack.extend((c, False) for c in kids if id(c) not in memo)
                continue
            self._keep.append(node)
            if isinstance(node, QConst):
                t = self.fresh()
                self.clauses.append([t] if node.value else [-t])
                memo[id(node)] = t
            elif isinstance(node, QNot):
                memo[id(node)] = -memo[id(node.arg)]
            elif isinstance(node, QAnd):
                ls = [memo[id(c)] for c in kids]
                t = self.fresh()
                for l in ls:
                    self.clauses.append([-t, l])
                self.clauses.append([t] + [-l for l in ls])
                memo[id(node)] = t
            elif isinstance(node, QOr):
                ls = [memo[id(c)] for c in kids]
                t = self.fresh()
                for l in ls:
                    self.clauses.append([t, -l])
                self.clauses.append([-t] + ls)
                memo[id(node)] = t
            elif isinstance(node, QImplies):
                a, b = memo[id(node.left)], memo[id(node.right)]
                t = self.fresh()
                self.clauses += [[-t, -a, b], [t, a], [t, -b]]
                memo[id(node)] = t
            elif isinstance(node, QIff):
                a, b = memo[id(node.left)], memo[id(node.right)]
                t = self.fresh()
                self.clauses += [[-t, -a, b], [-t, a, -b], [t, a, b], [t, -a, -b]]
                memo[id(node)] = t
            else:
                raise TypeError(node)
        return memo[id(root)]

    def assert_(self, node: QNode) -> None:
        """Add clauses forcing ``node`` true (top-level conjunctions split)."""
        if node is TOP:
            return
        if node is BOT:
            self.clauses.append([])
            return
        if isinstance(node, QAnd):
            for c in node.args:
                self.assert_(c)
            return
        if isinstance(node, QOr):
            self.clauses.append([self.lit(c) for c in node.args])
            return
        self.clauses.append([self.lit(node)])


def sat_check(matrix: QNode, names=(), stats: "SolverStats | None" = None):
    """Satisfiability of a propositional formula; returns (sat, model over names)."""
    if stats is not None:
        stats.sat_calls += 1
    if matrix is TOP:
        return True, {v: False for v in names}
    if matrix is BOT:
        return False, None
    enc = Tseitin()
    enc.assert_(matrix)
    if any(len(c) == 0 for c in enc.clauses):
        return False, None
    with Solver(name=SAT_BACKEND, bootstrap_with=enc.clauses) as s:
        if not s.solve():
            return False, None
        model = s.get_model() or []
    pos = {l for l in model if l > 0}
    return True, {v: enc.ids.get(v, 0) in pos for v in names}


# -- prenex form ----------------------------------------------------------------


class Prenexer:
    """Pull quantifiers to the front, renaming apart where names repeat.

    The level of a quantifier is the level of its nearest quantified ancestor,
    plus one when the effective kind changes, so dependencies are respected
    and the number of alternations stays minimal along every branch.
    """

    def __init__(self, first_exists: bool, taken=()):
        self.first_exists = first_exists
        self.levels: list[list[str]] = []
        self.used: set[str] = set(taken)
        self.counter = itertools.count(1)

    def kind_at(self, level: int) -> bool:
        return self.first_exists if level % 2 == 0 else not self.first_exists

    def _fresh(self, v: str) -> str:
        if v not in self.used:
            self.used.add(v)
            return v
        while True:
            name = f"{v}~{next(self.counter)}"
            if name not in self.used:
                self.used.add(name)
                return name

    def run(self, node: QNode) -> tuple[list[tuple[bool, list[str]]], QNode]:
        matrix = self.go(node, True, None, {})
        blocks = [(self.kind_at(i), vs) for i, vs in enumerate(self.levels)]
        return blocks, matrix

    def go(self, node: QNode, pos: bool, level: int | None, env: dict[str, str]) -> QNode:
        if not node.has_quantifier:
            ren = {k: v for k, v in env.items() if k != v and k in node.free_vars} if env else None
            return rename(node, ren) if ren else node
        if isinstance(node, QQuant):
            eff = node.exists if pos else not node.exists
            if level is None:
                lv = 0 if eff == self.first_exists else 1
            else:
                lv = level if eff == self.kind_at(level) else level + 1
            while len(self.levels) <= lv:
                self.levels.append([])
            inner = dict(env)
            for v in node.vars:
                new = self._fresh(v)
                inner[v] = new
                self.levels[lv].append(new)
            return self.go(node.body, pos, lv, inner)
        if isinstance(node, QNot):
            return q_not(self.go(node.arg, not pos, level, env))
        if isinstance(node, QAnd):
            return q_conj([self.go(c, pos, level, env) for c in node.args])
        if isinstance(node, QOr):
            return q_disj([self.go(c, pos, level, env) for c in node.args])
        if isinstance(node, QImplies):
            return q_implies(self.go(node.left, not pos, level, env), self.go(node.right, pos, level, env))
        if isinstance(node, QIff):
            a, b = node.left, node.right
            both = q_and(q_implies(a, b), q_implies(b, a))
            return self.go(both, pos, level, env)
        raise TypeError(node)


def prenex(node: QNode) -> tuple[list[tuple[bool, list[str]]], QNode]:
    """Prenex form of a closed formula: (blocks outermost first, matrix)."""
    first = node.exists if isinstance(node, QQuant) else True
    blocks, matrix = Prenexer(first).run(node)
    return [(e, vs) for e, vs in blocks if vs], matrix


def merge_blocks(blocks):
    out: list[tuple[bool, list[str]]] = []
    for e, vs in blocks:
        if not vs:
            continue
        if out and out[-1][0] == e:
            out[-1] = (e, out[-1][1] + list(vs))
        else:
            out.append((e, list(vs)))
    return out


# -- counterexample-guided expansion -----------------------------------------------


@dataclass
class SolverStats:
    sat_calls: int = 0
    refinements: int = 0
    folded: int = 0
    max_expanded: int = 0
    notes: list = field(default_factory=list)


class Expander:
    def __init__(self, stats: SolverStats):
        self.stats = stats
        self.copy_ids = itertools.count(1)
        self.limit: int | None = None
        self.size = 0

    def solve(self, blocks, matrix: QNode):
        """Decide ``blocks. matrix``; returns (value, winning move of block 0 or None)."""
        blocks = merge_blocks(blocks)
        if isinstance(matrix, QConst) or not blocks:
            if not isinstance(matrix, QConst):
                raise QbfError("matrix has free variables")
            ex = blocks[0][0] if blocks else True
            won = matrix.value == ex
            return matrix.value, ({v: False for v in blocks[0][1]} if won and blocks else None)
        ex, X = blocks[0]
        if len(blocks) == 1:
            sat, model = sat_check(matrix if ex else q_not(matrix), X, self.stats)
            if ex:
                return sat, model
            return (not sat), model
        rest = blocks[1:]
        Y = rest[0][1]
        deeper = rest[1:]
        abs_blocks: list[tuple[bool, list[str]]] = [(ex, list(X))]
        parts: list[QNode] = []
        while True:
            abs_matrix = q_conj(parts) if ex else q_disj(parts)
            val, tau = self.solve(abs_blocks, abs_matrix)
            if val != ex:
                return val, None
            tau_x = {x: (tau or {}).get(x, False) for x in X}
            val2, mu = self.solve(rest, substitute(matrix, tau_x))
            if val2 == ex:
                return val2, tau_x
            self.stats.refinements += 1
            if self.limit is not None and self.stats.refinements > self.limit:
                raise InternalScaleError(
                    f"internal scale exceeded: {self.size} quantified variables below the outermost block "
                    f"and no answer within {REFINEMENT_BUDGET} refinements; use an external solver")
            mu_y = {y: (mu or {}).get(y, False) for y in Y}
            inst = substitute(matrix, mu_y)
            tag = next(self.copy_ids)
            ren = {v: f"{v}'{tag}" for _, vs in deeper for v in vs}
            inst = rename(inst, {k: v for k, v in ren.items() if k in inst.free_vars})
            parts.append(inst)
            for j, (e, vs) in enumerate(deeper):
                names = [ren[v] for v in vs]
                if j + 1 < len(abs_blocks):
                    abs_blocks[j + 1] = (e, abs_blocks[j + 1][1] + names)
                else:
                    abs_blocks.append((e, names))
            # keep the abstraction small: drop copies of variables that vanished
            fv = q_conj(parts).free_vars if ex else q_disj(parts).free_vars
            abs_blocks = [(abs_blocks[0][0], abs_blocks[0][1])] + [
                (e, [v for v in vs if v in fv]) for e, vs in abs_blocks[1:]
            ]


# -- top level ----------------------------------------------------------------------


class _Checker:
    def __init__(self, ceiling: int, stats: SolverStats):
        self.ceiling = ceiling
        self.stats = stats
        self.memo: dict[int, bool] = {}
        self._keep: list[QNode] = []
        self.expander = Expander(stats)

    def solve(self, node: QNode) -> bool:
        hit = self.memo.get(id(node))
        if hit is not None:
            return hit
        r = self._solve(node)
        self.memo[id(node)] = r
        self._keep.append(node)
        return r

    def _solve(self, node: QNode) -> bool:
        if isinstance(node, QConst):
            return node.value
        if isinstance(node, QNot):
            return not self.solve(node.arg)
        if isinstance(node, QAnd):
            return all(self.solve(c) for c in node.args)
        if isinstance(node, QOr):
            return any(self.solve(c) for c in node.args)
        if isinstance(node, QImplies):
            return (not self.solve(node.left)) or self.solve(node.right)
        if isinstance(node, QIff):
            return self.solve(node.left) == self.solve(node.right)
        if isinstance(node, QQuant):
            return self._quant(node)
        raise QbfError(f"free variable {node!r} in closed formula")

    def fold_closed(self, body: QNode) -> QNode:
        def leaf(n: QNode):
            if not n.has_quantifier:
                return n
            if not n.free_vars:
                self.stats.folded += 1
                return TOP if self.solve(n) else BOT
            return None

        return transform(body, leaf)

    def _quant(self, node: QQuant) -> bool:
        ex = node.exists
        X = set(node.vars)
        body = node.body
        # miniscoping
        split_or = isinstance(body, QOr) if ex else isinstance(body, QAnd)
        if split_or:
            parts = [q_quant(ex, node.vars, c) for c in body.args]
            return any(self.solve(p) for p in parts) if ex else all(self.solve(p) for p in parts)
        group = QAnd if ex else QOr
        if isinstance(body, group):
            comps = _components(body.args, X)
            if len(comps) > 1:
                parts = [q_quant(ex, [v for v in node.vars if v in vs], (q_conj if ex else q_disj)(items))
                         for vs, items in comps]
                return all(self.solve(p) for p in parts) if ex else any(self.solve(p) for p in parts)
        if not body.has_quantifier:
            sat, _ = sat_check(body if ex else q_not(body), (), self.stats)
            return sat if ex else not sat
        folded = self.fold_closed(body)
        if folded is not body:
            return self.solve(_quant_literals(ex, node.vars, folded))
        blocks, matrix = prenex(node)
        expanded = sum(len(vs) for _, vs in blocks[1:])
        self.stats.max_expanded = max(self.stats.max_expanded, expanded)
        # within the ceiling the expansion always runs to completion; above
        # it the solver still tries, but only for a bounded number of rounds
        if expanded > self.ceiling:
            self.expander.limit = self.stats.refinements + REFINEMENT_BUDGET
            self.expander.size = expanded
        try:
            val, _ = self.expander.solve(blocks, matrix)
        finally:
            self.expander.limit = None
        return val


def _components(items, X: set[str]):
    """Group items that share quantified variables; items without any are their own group."""
    parent = list(range(len(items)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[str, int] = {}
    for i, it in enumerate(items):
        for v in it.free_vars & X:
            j = owner.setdefault(v, i)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(len(items)):
        groups.setdefault(find(i), []).append(i)
    out = []
    for idx in groups.values():
        its = [items[i] for i in idx]
        vs = set()
        for it in its:
            vs |= it.free_vars & X
        out.append((vs, its))
    return out


def check_validity(f: QNode, ceiling: int = DEFAULT_CEILING, stats: SolverStats | None = None) -> bool:
    """Validity of a closed QBF."""
    if f.free_vars:
        raise QbfError(f"formula is not closed; free variables {sorted(f.free_vars)[:10]}")
    stats = stats if stats is not None else SolverStats()
    return _Checker(ceiling, stats).solve(simplify(f))
