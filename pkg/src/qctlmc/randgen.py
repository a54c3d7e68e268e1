"""Random small structures and formulas for differential testing."""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import formula as F
from .kripke import KripkeStructure

PROPS = ("a", "b")
QPROPS = ("p", "q")

_UNARY_T = (F.EX, F.AX, F.EF, F.AF, F.EG, F.AG)
_BINARY_T = (F.EU, F.AU, F.EW, F.AW)
_UNTIL_FAMILY = (F.EF, F.AF, F.EG, F.EU, F.AU, F.EW, F.AW)
_BOOL = (F.And, F.Or, F.Implies, F.Iff)
_QUANT = (F.Exists, F.Forall, F.Exists1, F.Forall1)


def random_structure(rng: random.Random, n_min: int = 2, n_max: int = 4,
                     props=PROPS, edge_p: float = 0.35) -> KripkeStructure:
    n = rng.randint(n_min, n_max)
    vs = [f"v{i}" for i in range(1, n + 1)]
    edges = []
    for v in vs:
        succ = [w for w in vs if rng.random() < edge_p]
        if not succ:
            succ = [rng.choice(vs)]
        edges += [(v, w) for w in succ]
    labels = {v: [p for p in props if rng.random() < 0.5] for v in vs}
    return KripkeStructure(vs, edges, labels, init=vs[0])


@dataclass
class FormulaGen:
    """Configurable random formula generator.

    ``height`` bounds the temporal height, ``quantifiers`` the number of
    quantifier nodes. With ``prenex`` all quantifiers form an outer prefix.
    ``until_only`` restricts temporal operators to the until family, so that
    each one carries exactly one fixed point.
    """

    rng: random.Random
    height: int = 3
    quantifiers: int = 2
    prenex: bool = False
    props: tuple = PROPS
    qprops: tuple = QPROPS
    kinds: tuple = _QUANT
    until_only: bool = False
    max_depth: int = 5

    def formula(self) -> F.Formula:
        rng = self.rng
        nq = rng.randint(0, self.quantifiers)
        if not self.prenex:
            self._budget = nq
            return self._gen(self.height, self.max_depth, ())
        self._budget = 0
        bound = [self.qprops[i % len(self.qprops)] + ("" if i < len(self.qprops) else str(i)) for i in range(nq)]
        body = self._gen(self.height, self.max_depth, tuple(bound))
        for p in reversed(bound):
            body = rng.choice(self.kinds)(p, body)
        return body

    def _leaf(self, scope: tuple) -> F.Formula:
        rng = self.rng
        r = rng.random()
        if r < 0.08:
            return rng.choice((F.TRUE, F.FALSE))
        pool = list(self.props) + list(scope) * 2
        return F.Atom(rng.choice(pool))

    def _gen(self, h: int, depth: int, scope: tuple) -> F.Formula:
        rng = self.rng
        if depth <= 0:
            return self._leaf(scope)
        r = rng.random()
        if self._budget > 0 and r < 0.2:
            self._budget -= 1
            p = self.qprops[len(scope) % len(self.qprops)]
            if p in scope:
                p = f"{p}{len(scope)}"
            return rng.choice(self.kinds)(p, self._gen(h, depth - 1, scope + (p,)))
        if r < 0.3:
            return self._leaf(scope)
        if r < 0.4:
            return F.Not(self._gen(h, depth - 1, scope))
        if r < 0.6 or h == 0:
            cls = rng.choice(_BOOL)
            return cls(self._gen(h, depth - 1, scope), self._gen(h, depth - 1, scope))
        pool = _UNTIL_FAMILY if self.until_only else _UNARY_T + _BINARY_T
        cls = rng.choice(pool)
        if cls in _BINARY_T:
            return cls(self._gen(h - 1, depth - 1, scope), self._gen(h - 1, depth - 1, scope))
        return cls(self._gen(h - 1, depth - 1, scope))


def random_formula(rng: random.Random, **kw) -> F.Formula:
    return FormulaGen(rng, **kw).formula()


def random_env(rng: random.Random, K: KripkeStructure, props=QPROPS, nonempty: bool = True) -> dict[str, set[str]]:
    env = {}
    for p in props:
        if nonempty or rng.random() < 0.7:
            env[p] = {v for v in K.vertices if rng.random() < 0.5}
    return env


@dataclass(frozen=True)
class RandomJob:
    structure: KripkeStructure
    initial: str
    formula: F.Formula


def random_job(rng: random.Random, prenex: bool = False, **kw) -> RandomJob:
    K = random_structure(rng)
    x = rng.choice(K.vertices)
    return RandomJob(K, x, random_formula(rng, prenex=prenex, **kw))
