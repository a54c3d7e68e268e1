"""Direct QCTL semantics by explicit enumeration (the reference oracle).

Sets of states are Python ints used as bitmasks over the declaration order
of the structure. Until operators are least fixed points, weak until and the
G operators greatest fixed points. Quantifiers enumerate every labelling.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from . import formula as F
from .kripke import KripkeStructure
from .rewrite import expand_derived, rename_apart

MAX_QUANTIFIED_STATES = 20
MAX_COST = 1 << 22


class OracleError(ValueError):
    pass


class OracleScaleError(OracleError):
    pass


Environment = Mapping[str, Iterable[str]]


class _Evaluator:
    def __init__(self, K: KripkeStructure, env: Mapping[str, int]):
        self.K = K
        self.n = len(K)
        self.full = (1 << self.n) - 1
        self.env = dict(env)
        idx = K.index
        self.succ = [0] * self.n
        for v in K.vertices:
            m = 0
            for w in K.successors(v):
                m |= 1 << idx(w)
            self.succ[idx(v)] = m
        self.reach = [0] * self.n
        for v in K.vertices:
            m = 0
            for w in K.reachable(v):
                m |= 1 << idx(w)
            self.reach[idx(v)] = m
        # coreach[y]: states from which y is reachable
        self.coreach = [0] * self.n
        for i in range(self.n):
            r = self.reach[i]
            for j in range(self.n):
                if r >> j & 1:
                    self.coreach[j] |= 1 << i
        self.label_cache: dict[str, int] = {}

    def label_mask(self, p: str) -> int:
        m = self.label_cache.get(p)
        if m is None:
            m = 0
            for i, v in enumerate(self.K.vertices):
                if p in self.K.labels[v]:
                    m |= 1 << i
            self.label_cache[p] = m
        return m

    # -- one-step operators ----------------------------------------------

    def ex(self, s: int) -> int:
        out = 0
        for i, m in enumerate(self.succ):
            if m & s:
                out |= 1 << i
        return out

    def ax(self, s: int) -> int:
        out = 0
        for i, m in enumerate(self.succ):
            if m & ~s == 0:
                out |= 1 << i
        return out

    def count_succ(self, s: int) -> list[int]:
        return [bin(m & s).count("1") for m in self.succ]

    def lfp(self, step, base: int, guard: int) -> int:
        z = base
        for _ in range(self.n + 1):
            nz = base | (guard & step(z))
            if nz == z:
                return z
            z = nz
        raise AssertionError("least fixed point did not stabilise")

    def gfp(self, step, base: int, guard: int) -> int:
        z = self.full
        for _ in range(self.n + 1):
            nz = base | (guard & step(z))
            if nz == z:
                return z
            z = nz
        raise AssertionError("greatest fixed point did not stabilise")

    # -- satisfaction sets -------------------------------------------------

    def sat(self, f: F.Formula) -> int:
        if isinstance(f, F.Const):
            return self.full if f.value else 0
        if isinstance(f, F.Atom):
            if f.name in self.env:
                return self.env[f.name]
            return self.label_mask(f.name)
        if isinstance(f, F.Not):
            return self.full & ~self.sat(f.arg)
        if isinstance(f, F.And):
            return self.sat(f.left) & self.sat(f.right)
        if isinstance(f, F.Or):
            return self.sat(f.left) | self.sat(f.right)
        if isinstance(f, F.Implies):
            return (self.full & ~self.sat(f.left)) | self.sat(f.right)
        if isinstance(f, F.Iff):
            return self.full & ~(self.sat(f.left) ^ self.sat(f.right))
        if isinstance(f, F.EX):
            return self.ex(self.sat(f.arg))
        if isinstance(f, F.AX):
            return self.ax(self.sat(f.arg))
        if isinstance(f, F.EF):
            return self.lfp(self.ex, self.sat(f.arg), self.full)
        if isinstance(f, F.AF):
            return self.lfp(self.ax, self.sat(f.arg), self.full)
        if isinstance(f, F.EG):
            return self.gfp(self.ex, 0, self.sat(f.arg))
        if isinstance(f, F.AG):
            return self.gfp(self.ax, 0, self.sat(f.arg))
        if isinstance(f, F.EU):
            return self.lfp(self.ex, self.sat(f.right), self.sat(f.left))
        if isinstance(f, F.AU):
            return self.lfp(self.ax, self.sat(f.right), self.sat(f.left))
        if isinstance(f, F.EW):
            return self.gfp(self.ex, self.sat(f.right), self.sat(f.left))
        if isinstance(f, F.AW):
            return self.gfp(self.ax, self.sat(f.right), self.sat(f.left))
        if isinstance(f, F.UniqueF):
            s = self.sat(f.arg)
            return self._mask(bin(self.reach[i] & s).count("1") == 1 for i in range(self.n))
        if isinstance(f, F.UniqueX):
            return self._mask(c == 1 for c in self.count_succ(self.sat(f.arg)))
        if isinstance(f, F.AtLeastX):
            return self._mask(c >= f.k for c in self.count_succ(self.sat(f.arg)))
        if isinstance(f, F.ExactlyX):
            return self._mask(c == f.k for c in self.count_succ(self.sat(f.arg)))
        if isinstance(f, (F.Exists, F.Forall)):
            return self._quant_sat(f)
        if isinstance(f, (F.Exists1, F.Forall1)):
            return self._quant1_sat(f)
        raise TypeError(f"unexpected node {f!r}")

    def _mask(self, bits) -> int:
        out = 0
        for i, b in enumerate(bits):
            if b:
                out |= 1 << i
        return out

    def _with(self, p: str, mask: int, fn, *args):
        saved = self.env.get(p, None)
        self.env[p] = mask
        try:
            return fn(*args)
        finally:
            if saved is None:
                del self.env[p]
            else:
                self.env[p] = saved

    def _quant_sat(self, f: F.Quantifier) -> int:
        exists = isinstance(f, F.Exists)
        acc = 0 if exists else self.full
        for mask in range(1 << self.n):
            s = self._with(f.prop, mask, self.sat, f.body)
            if exists:
                acc |= s
                if acc == self.full:
                    break
            else:
                acc &= s
                if acc == 0:
                    break
        return acc

    def _quant1_sat(self, f: F.Quantifier) -> int:
        exists = isinstance(f, F.Exists1)
        acc = 0 if exists else self.full
        for y in range(self.n):
            s = self._with(f.prop, 1 << y, self.sat, f.body)
            if exists:
                acc |= s & self.coreach[y]
            else:
                acc &= s | (self.full & ~self.coreach[y])
        return acc

    # -- truth at a single state ---------------------------------------------

    def holds(self, f: F.Formula, i: int) -> bool:
        """Truth at state index ``i``; short-circuits where the set is not needed."""
        if isinstance(f, F.Not):
            return not self.holds(f.arg, i)
        if isinstance(f, F.And):
            return self.holds(f.left, i) and self.holds(f.right, i)
        if isinstance(f, F.Or):
            return self.holds(f.left, i) or self.holds(f.right, i)
        if isinstance(f, F.Implies):
            return (not self.holds(f.left, i)) or self.holds(f.right, i)
        if isinstance(f, (F.Exists, F.Forall)):
            want = isinstance(f, F.Exists)
            for mask in range(1 << self.n):
                if self._with(f.prop, mask, self.holds, f.body, i) == want:
                    return want
            return not want
        if isinstance(f, (F.Exists1, F.Forall1)):
            want = isinstance(f, F.Exists1)
            r = self.reach[i]
            for y in range(self.n):
                if r >> y & 1 and self._with(f.prop, 1 << y, self.holds, f.body, i) == want:
                    return want
            return not want
        return bool(self.sat(f) >> i & 1)


def enumeration_cost(f: F.Formula, n: int) -> int:
    """Rough count of node evaluations performed by the oracle."""
    if isinstance(f, (F.Exists, F.Forall)):
        return (1 << n) * enumeration_cost(f.body, n)
    if isinstance(f, (F.Exists1, F.Forall1)):
        return n * enumeration_cost(f.body, n)
    return 1 + sum(enumeration_cost(c, n) for c in f.children())


def _check_scale(K: KripkeStructure, f: F.Formula) -> None:
    n = len(K)
    if n > MAX_QUANTIFIED_STATES and any(isinstance(g, (F.Exists, F.Forall)) for g in F.walk(f)):
        raise OracleScaleError(
            f"oracle scale exceeded: {n} states with set quantifiers (limit {MAX_QUANTIFIED_STATES})")
    cost = enumeration_cost(f, n)
    if cost > MAX_COST:
        raise OracleScaleError(f"oracle scale exceeded: estimated cost {cost} > {MAX_COST}")


def _env_masks(K: KripkeStructure, env: Environment) -> dict[str, int]:
    out = {}
    for p, states in env.items():
        m = 0
        for v in states:
            m |= 1 << K.index(v)
        out[p] = m
    return out


def eval_formula(
    K: KripkeStructure,
    x: str,
    env: Environment | None,
    f: F.Formula,
    restrict_reachable: bool = False,
) -> bool:
    """K, x |=_env f under the structure semantics."""
    env = dict(env or {})
    K.index(x)
    clash = F.bound_props(f) & set(env)
    if clash:
        raise OracleError(f"quantified propositions {sorted(clash)} collide with the environment domain")
    if restrict_reachable:
        keep = K.reachable(x)
        if len(keep) < len(K):
            K = K.restrict(keep, init=x)
            env = {p: [v for v in vs if v in keep] for p, vs in env.items()}
    _check_scale(K, f)
    ev = _Evaluator(K, _env_masks(K, env))
    return ev.holds(f, K.index(x))


# ``eval`` shadows the builtin, so the implementation carries a longer name
eval = eval_formula


def sat_set(K: KripkeStructure, f: F.Formula, env: Environment | None = None) -> frozenset[str]:
    _check_scale(K, f)
    ev = _Evaluator(K, _env_masks(K, env or {}))
    s = ev.sat(f)
    return frozenset(v for i, v in enumerate(K.vertices) if s >> i & 1)


def model_check(
    K: KripkeStructure,
    x: str,
    f: F.Formula,
    expand_counting: bool = False,
    restrict_reachable: bool = False,
) -> bool:
    """K, x |= f with the empty environment.

    Counting operators are evaluated by counting unless ``expand_counting``
    asks for their quantified definitions.
    """
    reserved = K.propositions()
    if expand_counting:
        f = expand_derived(f, reserved)
    f = rename_apart(f, reserved)
    return eval_formula(K, x, {}, f, restrict_reachable=restrict_reachable)
