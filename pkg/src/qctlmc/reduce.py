"""QCTL model checking reduced to QBF validity, four ways.

Variables are named ``p@v`` (proposition p at state v) and ``k@v#b`` (bit b,
least significant first, of a bit-vector proposition k at state v).

``uu``
    Until unfolded along simple paths; no quantifiers beyond the formula's own.
``fp``
    Until replaced by its fixed-point characterisation, AG by a conjunction
    over reachable states.
``fpf``
    As ``fp`` on the flat form with defining equivalences (prenex input).
``x``
    Flat form in NNF with defining implications; until propositions become
    per-state distance counters. Produces a prenex QBF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import formula as F
from .kripke import KripkeStructure
from .qbf.ast import (
    BOT, TOP, QNode, q_conj, q_disj, q_exists, q_forall, q_iff, q_implies, q_not, q_and, q_or, q_quant, var,
)
from .rewrite import core_temporal, expand_derived, rename_apart, split_prenex
from .transform import LFP, FlatFormula, flatten_equiv, flatten_nnf, fpc

STRATEGIES = ("uu", "fp", "fpf", "x")
EXISTS1_MODES = ("propositional", "onehot", "bitvector")


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class ReductionJob:
    structure: KripkeStructure
    initial: str
    formula: F.Formula
    strategy: str = "fp"
    until_bound: int | None = None
    exists1_mode: str | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ReductionError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        if self.exists1_mode is not None and self.exists1_mode not in EXISTS1_MODES:
            raise ReductionError(f"unknown exists1 mode {self.exists1_mode!r}")
        if self.exists1_mode == "bitvector" and self.strategy != "x":
            raise ReductionError("bit-vector encoding of exists1/forall1 is only available for strategy x")
        if self.until_bound is not None:
            if self.strategy != "x":
                raise ReductionError("an until bound only applies to strategy x")
            if self.until_bound < 1:
                raise ReductionError("until bound must be at least 1")
            if self.until_bound > len(self.structure):
                raise ReductionError(f"until bound {self.until_bound} exceeds |V| = {len(self.structure)}")
        self.structure.index(self.initial)


def qvar(p: str, v: str) -> QNode:
    return var(f"{p}@{v}")


def bit_var(p: str, v: str, b: int) -> QNode:
    return var(f"{p}@{v}#{b}")


def bit_width(n_states: int) -> int:
    return max(1, math.ceil(math.log2(n_states + 1)))


def bits_eq(p: str, v: str, d: int, width: int) -> QNode:
    """[p^v = d] over little-endian bits."""
    if d < 0 or d >= 1 << width:
        return BOT
    return q_conj(bit_var(p, v, b) if d >> b & 1 else q_not(bit_var(p, v, b)) for b in range(width))


def bits_lt(p: str, v: str, d: int, width: int) -> QNode:
    """[p^v < d]: some bit set in d is clear in p while all higher bits agree."""
    if d <= 0:
        return BOT
    if d >= 1 << width:
        return TOP
    terms = []
    for i in range(width - 1, -1, -1):
        if d >> i & 1:
            higher = [bit_var(p, v, j) if d >> j & 1 else q_not(bit_var(p, v, j))
                      for j in range(width - 1, i, -1)]
            terms.append(q_conj([q_not(bit_var(p, v, i))] + higher))
    return q_disj(terms)


def one_eq(p: str, i: int, width: int) -> QNode:
    """[c = i] for the single bit vector ``p#0 .. p#(w-1)`` naming a state index."""
    return q_conj(var(f"{p}#{b}") if i >> b & 1 else q_not(var(f"{p}#{b}")) for b in range(width))


def exactly_one(items: list[QNode]) -> QNode:
    at_most = [q_or(q_not(a), q_not(b)) for i, a in enumerate(items) for b in items[i + 1:]]
    return q_conj([q_disj(items)] + at_most)


def _lazy_or(gen) -> QNode:
    items = []
    for q in gen:
        if q is TOP:
            return TOP
        items.append(q)
    return q_disj(items)


def _lazy_and(gen) -> QNode:
    items = []
    for q in gen:
        if q is BOT:
            return BOT
        items.append(q)
    return q_conj(items)


class Translator:
    """Rule-based translation shared by the UU, FP and FPF methods.

    ``P`` holds propositions translated as variables; bound names are unique
    after renaming, so membership does not depend on position. Propositions
    fixed to one state (``exists1`` in propositional mode) travel in
    ``fixed``, a sorted tuple of (prop, state) pairs.
    """

    def __init__(self, K: KripkeStructure, P: Iterable[str] = (), exists1_mode: str = "propositional",
                 unfold_until: bool = False):
        self.K = K
        self.P = set(P)
        self.exists1_mode = exists1_mode
        self.unfold_until = unfold_until
        self.memo: dict = {}
        self.keep: list = []
        idx = K.index
        self.reach_mask = {v: sum(1 << idx(w) for w in K.reachable(v)) for v in K.vertices}
        self.reach_ordered = {v: K.reachable_ordered(v) for v in K.vertices}

    # -- atoms -----------------------------------------------------------

    def atom(self, p: str, x: str, fixed: tuple) -> QNode:
        for q, y in fixed:
            if q == p:
                return TOP if y == x else BOT
        if p in self.P:
            return qvar(p, x)
        return TOP if p in self.K.labels[x] else BOT

    # -- main recursion ----------------------------------------------------

    def tr(self, f: F.Formula, x: str, fixed: tuple = ()) -> QNode:
        key = (id(f), x, fixed)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        r = self._tr(f, x, fixed)
        self.memo[key] = r
        self.keep.append(f)
        return r

    def _tr(self, f: F.Formula, x: str, fixed: tuple) -> QNode:
        K = self.K
        if isinstance(f, F.Const):
            return TOP if f.value else BOT
        if isinstance(f, F.Atom):
            return self.atom(f.name, x, fixed)
        if isinstance(f, F.Not):
            return q_not(self.tr(f.arg, x, fixed))
        if isinstance(f, F.And):
            a = self.tr(f.left, x, fixed)
            return BOT if a is BOT else q_and(a, self.tr(f.right, x, fixed))
        if isinstance(f, F.Or):
            a = self.tr(f.left, x, fixed)
            return TOP if a is TOP else q_or(a, self.tr(f.right, x, fixed))
        if isinstance(f, F.Implies):
            a = self.tr(f.left, x, fixed)
            return TOP if a is BOT else q_implies(a, self.tr(f.right, x, fixed))
        if isinstance(f, F.Iff):
            return q_iff(self.tr(f.left, x, fixed), self.tr(f.right, x, fixed))
        if isinstance(f, F.EX):
            return _lazy_or(self.tr(f.arg, y, fixed) for y in K.successors(x))
        if isinstance(f, F.AX):
            return _lazy_and(self.tr(f.arg, y, fixed) for y in K.successors(x))
        if isinstance(f, F.AG) and not self.unfold_until:
            return _lazy_and(self.tr(f.arg, y, fixed) for y in self.reach_ordered[x])
        if isinstance(f, (F.EU, F.AU)) and self.unfold_until:
            X = 1 << K.index(x)
            if isinstance(f, F.EU):
                return self.eu_bar(f, x, X, fixed)
            return self.au_bar(f, x, X, fixed)
        if isinstance(f, (F.Exists, F.Forall)):
            names = [f"{f.prop}@{v}" for v in K.vertices]
            return q_quant(isinstance(f, F.Exists), names, self.tr(f.body, x, fixed))
        if isinstance(f, (F.Exists1, F.Forall1)):
            return self.one_state(f, x, fixed)
        raise ReductionError(f"no translation rule for {type(f).__name__} here")

    def one_state(self, f: F.Quantifier, x: str, fixed: tuple) -> QNode:
        ex = isinstance(f, F.Exists1)
        states = self.reach_ordered[x]
        if self.exists1_mode == "onehot":
            ps = [qvar(f.prop, y) for y in states]
            body = self.tr(f.body, x, fixed)
            rng = exactly_one(ps)
            names = [f"{f.prop}@{y}" for y in states]
            if ex:
                return q_exists(names, q_and(rng, body))
            return q_forall(names, q_implies(rng, body))
        gen = (self.tr(f.body, x, tuple(sorted(fixed + ((f.prop, y),)))) for y in states)
        return _lazy_or(gen) if ex else _lazy_and(gen)

    # -- unfolded until --------------------------------------------------------

    def _candidates(self, f: F.Formula, fixed: tuple) -> tuple[int, int]:
        """Masks of states where the right (resp. left) side is not plainly false."""
        key = ("cand", id(f), fixed)
        hit = self.memo.get(key)
        if hit is None:
            psi = phi = 0
            for i, y in enumerate(self.K.vertices):
                if self.tr(f.right, y, fixed) is not BOT:
                    psi |= 1 << i
                if self.tr(f.left, y, fixed) is not BOT:
                    phi |= 1 << i
            hit = self.memo[key] = (psi, phi)
        return hit

    def _may_reach(self, f: F.Formula, x: str, X: int, fixed: tuple) -> bool:
        """Is a psi-candidate reachable from x through phi-candidates avoiding X?"""
        psi, phi = self._candidates(f, fixed)
        K = self.K
        i = K.index(x)
        if psi >> i & 1:
            return True
        if not phi >> i & 1:
            return False
        seen = X | 1 << i
        stack = [x]
        while stack:
            v = stack.pop()
            for w in K.successors(v):
                j = K.index(w)
                if seen >> j & 1:
                    continue
                seen |= 1 << j
                if psi >> j & 1:
                    return True
                if phi >> j & 1:
                    stack.append(w)
        return False

    def eu_bar(self, f: F.EU, x: str, X: int, fixed: tuple) -> QNode:
        key = ("EU", id(f), x, X & self.reach_mask[x], fixed)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if not self._may_reach(f, x, X, fixed):
            r = BOT
        else:
            psi = self.tr(f.right, x, fixed)
            if psi is TOP:
                r = TOP
            else:
                phi = self.tr(f.left, x, fixed)
                if phi is BOT:
                    r = psi
                else:
                    K = self.K
                    succ = (self.eu_bar(f, y, X | 1 << K.index(y), fixed)
                            for y in K.successors(x) if not X >> K.index(y) & 1)
                    r = q_or(psi, q_and(phi, _lazy_or(succ)))
        self.memo[key] = r
        return r

    def au_bar(self, f: F.AU, x: str, X: int, fixed: tuple) -> QNode:
        key = ("AU", id(f), x, X & self.reach_mask[x], fixed)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        K = self.K
        psi = self.tr(f.right, x, fixed)
        succs = K.successors(x)
        if psi is TOP:
            r = TOP
        elif any(X >> K.index(y) & 1 for y in succs):
            r = psi
        else:
            phi = self.tr(f.left, x, fixed)
            if phi is BOT:
                r = psi
            else:
                sub = (self.au_bar(f, y, X | 1 << K.index(y), fixed) for y in succs)
                r = q_or(psi, q_and(phi, _lazy_and(sub)))
        self.memo[key] = r
        return r


# -- preparation --------------------------------------------------------------------


def prepare_formula(K: KripkeStructure, f: F.Formula, extra_reserved: Iterable[str] = ()) -> F.Formula:
    reserved = set(K.propositions()) | set(extra_reserved)
    return rename_apart(expand_derived(f, reserved), reserved)


def _variable_props(f: F.Formula, exists1_mode: str) -> set[str]:
    out = set()
    for g in F.walk(f):
        if isinstance(g, (F.Exists, F.Forall)):
            out.add(g.prop)
        elif isinstance(g, (F.Exists1, F.Forall1)) and exists1_mode != "propositional":
            out.add(g.prop)
    return out


# -- the four methods ---------------------------------------------------------------


def reduce_uu(K: KripkeStructure, x: str, f: F.Formula, exists1_mode: str = "propositional",
              P: Iterable[str] = ()) -> QNode:
    """Unfolding reduction; ``P`` lists free propositions to read as variables."""
    g = core_temporal(prepare_formula(K, f, P))
    tr = Translator(K, _variable_props(g, exists1_mode) | set(P), exists1_mode, unfold_until=True)
    return tr.tr(g, x)


def reduce_fp(K: KripkeStructure, x: str, f: F.Formula, exists1_mode: str = "propositional",
              P: Iterable[str] = ()) -> QNode:
    g = fpc(prepare_formula(K, f, P), reserved=set(K.propositions()) | set(P))
    tr = Translator(K, _variable_props(g, exists1_mode) | set(P), exists1_mode)
    return tr.tr(g, x)


def reduce_fpf(K: KripkeStructure, x: str, f: F.Formula, exists1_mode: str = "propositional") -> QNode:
    g = prepare_formula(K, f)
    reserved = set(K.propositions())
    flat = flatten_equiv(g, reserved)
    h = fpc(flat.to_formula(), reserved=reserved)
    tr = Translator(K, _variable_props(h, exists1_mode), exists1_mode)
    return tr.tr(h, x)


class _XTranslator:
    """Rules for the flat NNF form with distance counters."""

    def __init__(self, K: KripkeStructure, flat: FlatFormula, bound: int | None, exists1_mode: str):
        self.K = K
        self.flat = flat
        self.width = bit_width(len(K))
        # largest distance value a counter may carry
        self.max_d = bound if bound is not None else len(K) - 1
        self.bool_vars: set[str] = set()
        self.counters: set[str] = set()
        self.one_bits: set[str] = set()
        for cls, p in flat.prefix:
            if cls in (F.Exists1, F.Forall1) and exists1_mode == "bitvector":
                self.one_bits.add(p)
            else:
                self.bool_vars.add(p)
        for k, mode in flat.kappa_props:
            (self.counters if mode == LFP else self.bool_vars).add(k)
        self.memo: dict = {}
        self.keep: list = []

    def atom(self, p: str, x: str) -> QNode:
        if p in self.bool_vars:
            return qvar(p, x)
        if p in self.counters:
            return bits_lt(p, x, self.max_d + 1, self.width)
        if p in self.one_bits:
            return one_eq(p, self.K.index(x), self.width)
        return TOP if p in self.K.labels[x] else BOT

    def tr(self, f: F.Formula, x: str) -> QNode:
        key = (id(f), x)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        r = self._tr(f, x)
        self.memo[key] = r
        self.keep.append(f)
        return r

    def _tr(self, f: F.Formula, x: str) -> QNode:
        K = self.K
        if isinstance(f, F.Const):
            return TOP if f.value else BOT
        if isinstance(f, F.Atom):
            return self.atom(f.name, x)
        if isinstance(f, F.Not):
            return q_not(self.tr(f.arg, x))
        if isinstance(f, F.And):
            return q_and(self.tr(f.left, x), self.tr(f.right, x))
        if isinstance(f, F.Or):
            return q_or(self.tr(f.left, x), self.tr(f.right, x))
        if isinstance(f, F.EX):
            return q_disj(self.tr(f.arg, y) for y in K.successors(x))
        if isinstance(f, F.AX):
            return q_conj(self.tr(f.arg, y) for y in K.successors(x))
        if isinstance(f, F.AG):
            return q_conj(self.tr(f.arg, y) for y in K.reachable_ordered(x))
        raise ReductionError(f"no rule for {type(f).__name__} in the flat NNF form")

    def clause(self, k: str, theta: F.Formula, x: str) -> QNode:
        K = self.K
        parts = []
        for y in K.reachable_ordered(x):
            succ = K.successors(y)
            if isinstance(theta, (F.EW, F.AW)):
                nxt = [qvar(k, z) for z in succ]
                step = q_disj(nxt) if isinstance(theta, F.EW) else q_conj(nxt)
                body = q_or(self.tr(theta.right, y), q_and(self.tr(theta.left, y), step))
                parts.append(q_implies(qvar(k, y), body))
            elif isinstance(theta, (F.EU, F.AU)):
                w = self.width
                parts.append(q_implies(bits_eq(k, y, 0, w), self.tr(theta.right, y)))
                phi = self.tr(theta.left, y)
                for d in range(1, self.max_d + 1):
                    if isinstance(theta, F.EU):
                        step = q_disj(bits_eq(k, z, d - 1, w) for z in succ)
                    else:
                        step = q_conj(bits_lt(k, z, d, w) for z in succ)
                    parts.append(q_implies(bits_eq(k, y, d, w), q_and(phi, step)))
            else:
                parts.append(q_implies(qvar(k, y), self.tr(theta, y)))
        return q_conj(parts)

    def run(self, x0: str) -> QNode:
        K = self.K
        flat = self.flat
        w = self.width
        matrix = q_conj([self.tr(flat.phi0, x0)] + [self.clause(c.kappa, c.theta, x0) for c in flat.clauses])
        # one-state quantifiers guard the body with a range constraint:
        # exists1 c. phi  ~>  exists c. (range & phi), forall1 ~> (range -> phi).
        # Guards mention only prefix variables, so they go into the matrix and
        # the result stays prenex.
        reach0 = K.reachable_ordered(x0)
        blocks = []
        for cls, p in reversed(flat.prefix):
            exists = cls in (F.Exists, F.Exists1)
            if p in self.one_bits:
                names = [f"{p}#{b}" for b in range(w)]
                rng = q_disj(one_eq(p, K.index(y), w) for y in reach0)
            elif cls in (F.Exists1, F.Forall1):
                names = [f"{p}@{y}" for y in reach0]
                rng = exactly_one([qvar(p, y) for y in reach0])
            else:
                names, rng = [f"{p}@{v}" for v in K.vertices], None
            if rng is not None:
                matrix = q_and(rng, matrix) if exists else q_implies(rng, matrix)
            blocks.append((exists, names))
        kappa_names = []
        for k, mode in flat.kappa_props:
            if mode == LFP:
                kappa_names += [f"{k}@{v}#{b}" for v in K.vertices for b in range(w)]
            else:
                kappa_names += [f"{k}@{v}" for v in K.vertices]
        core = q_exists(kappa_names, matrix)
        for exists, names in blocks:
            core = q_quant(exists, names, core)
        return core


def reduce_x(K: KripkeStructure, x: str, f: F.Formula, until_bound: int | None = None,
             exists1_mode: str = "bitvector") -> QNode:
    g = prepare_formula(K, f)
    flat = flatten_nnf(g, K.propositions())
    if exists1_mode == "propositional":
        exists1_mode = "onehot"
    return _XTranslator(K, flat, until_bound, exists1_mode).run(x)


def reduce(job: ReductionJob) -> QNode:
    K, x, f = job.structure, job.initial, job.formula
    mode = job.exists1_mode
    if job.strategy in ("fpf", "x"):
        split_prenex(expand_derived(f, K.propositions()))
    if job.strategy == "uu":
        return reduce_uu(K, x, f, mode or "propositional")
    if job.strategy == "fp":
        return reduce_fp(K, x, f, mode or "propositional")
    if job.strategy == "fpf":
        return reduce_fpf(K, x, f, mode or "propositional")
    return reduce_x(K, x, f, job.until_bound, mode or "bitvector")


# -- environment bridge -----------------------------------------------------------


def valuation_from_env(K: KripkeStructure, env: Mapping[str, Iterable[str]]) -> dict[str, bool]:
    """v_env: ``p@x`` is true iff x is in env(p)."""
    out = {}
    for p, states in env.items():
        chosen = set(states)
        for v in K.vertices:
            out[f"{p}@{v}"] = v in chosen
    return out


def translate_under(K: KripkeStructure, x: str, f: F.Formula, P: Iterable[str], strategy: str = "uu") -> QNode:
    """Translation of ``f`` at ``x`` with the propositions of ``P`` read as variables."""
    P = set(P)
    if strategy == "uu":
        return reduce_uu(K, x, f, P=P)
    if strategy == "fp":
        return reduce_fp(K, x, f, P=P)
    raise ReductionError("translation under an environment is defined for uu and fp")
