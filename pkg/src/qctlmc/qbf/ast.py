"""Quantified Boolean formulas.

Nodes are hash-consed: building the same node twice returns the same object,
so equality is identity and memo tables can key on ``id``. All construction
goes through the smart constructors below, which fold constants, flatten
n-ary connectives and drop unused quantified variables.
"""

from __future__ import annotations

import itertools
import weakref
from typing import Iterable, Mapping

_table: "weakref.WeakValueDictionary[tuple, QNode]" = weakref.WeakValueDictionary()


class QbfError(ValueError):
    pass


class QNode:
    __slots__ = ("_fv", "_hq", "_size", "__weakref__")
    kind = ""

    def children(self) -> tuple["QNode", ...]:
        return ()

    @property
    def free_vars(self) -> frozenset[str]:
        fv = self._fv
        if fv is None:
            fv = _free_vars(self)
        return fv

    @property
    def has_quantifier(self) -> bool:
        hq = self._hq
        if hq is None:
            _free_vars(self)
            hq = self._hq
        return hq

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        text = to_text(self)
        if len(text) > 200:
            text = text[:200] + "..."
        return f"<{type(self).__name__} {text}>"

    # sugar for tests
    def __and__(self, other):
        return q_and(self, other)

    def __or__(self, other):
        return q_or(self, other)

    def __invert__(self):
        return q_not(self)


class QConst(QNode):
    __slots__ = ("value",)
    kind = "const"


class QVar(QNode):
    __slots__ = ("name",)
    kind = "var"


class QNot(QNode):
    __slots__ = ("arg",)
    kind = "not"

    def children(self):
        return (self.arg,)


class QAnd(QNode):
    __slots__ = ("args",)
    kind = "and"

    def children(self):
        return self.args


class QOr(QNode):
    __slots__ = ("args",)
    kind = "or"

    def children(self):
        return self.args


class QImplies(QNode):
    __slots__ = ("left", "right")
    kind = "implies"

    def children(self):
        return (self.left, self.right)


class QIff(QNode):
    __slots__ = ("left", "right")
    kind = "iff"

    def children(self):
        return (self.left, self.right)


class QQuant(QNode):
    __slots__ = ("vars", "body")
    exists = True

    def children(self):
        return (self.body,)


class QExists(QQuant):
    __slots__ = ()
    kind = "exists"
    exists = True


class QForall(QQuant):
    __slots__ = ()
    kind = "forall"
    exists = False


def _intern(cls, key: tuple, **attrs) -> QNode:
    k = (cls,) + key
    node = _table.get(k)
    if node is None:
        node = cls.__new__(cls)
        node._fv = None
        node._hq = None
        node._size = None
        for a, v in attrs.items():
            setattr(node, a, v)
        _table[k] = node
    return node


TOP: QConst = _intern(QConst, (True,), value=True)
BOT: QConst = _intern(QConst, (False,), value=False)
# constants must stay alive for the life of the process
_PINNED = (TOP, BOT)


def const(value: bool) -> QConst:
    return TOP if value else BOT


def var(name: str) -> QVar:
    return _intern(QVar, (name,), name=name)


def _free_vars(root: QNode) -> frozenset[str]:
    # iterative post-order so deep formulas do not hit the recursion limit
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if node._fv is not None:
            continue
        if not done:
            stack.append((node, True))
            for c in node.children():
                if c._fv is None:
                    stack.append((c, False))
            continue
        if isinstance(node, QVar):
            node._fv = frozenset((node.name,))
            node._hq = False
        elif isinstance(node, QConst):
            node._fv = frozenset()
            node._hq = False
        elif isinstance(node, QQuant):
            body = node.body
            node._fv = body._fv - frozenset(node.vars)
            node._hq = True
        else:
            kids = node.children()
            best = max(kids, key=lambda c: len(c._fv))
            fv = best._fv
            for c in kids:
                if c is not best and not c._fv <= fv:
                    fv = fv | c._fv
            node._fv = fv
            node._hq = any(c._hq for c in kids)
    return root._fv


def q_not(a: QNode) -> QNode:
    if a is TOP:
        return BOT
    if a is BOT:
        return TOP
    if isinstance(a, QNot):
        return a.arg
    return _intern(QNot, (a,), arg=a)


def _nary(cls, absorbing: QNode, neutral: QNode, items: Iterable[QNode]) -> QNode:
    out: dict[int, QNode] = {}
    stack = list(items)
    stack.reverse()
    while stack:
        a = stack.pop()
        if a is absorbing:
            return absorbing
        if a is neutral:
            continue
        if isinstance(a, cls):
            stack.extend(reversed(a.args))
            continue
        out.setdefault(id(a), a)
    args = tuple(out.values())
    if not args:
        return neutral
    if len(args) == 1:
        return args[0]
    for a in args:
        if isinstance(a, QNot) and id(a.arg) in out:
            return absorbing
    return _intern(cls, args, args=args)


def q_and(*items: QNode) -> QNode:
    return _nary(QAnd, BOT, TOP, items)


def q_or(*items: QNode) -> QNode:
    return _nary(QOr, TOP, BOT, items)


def q_conj(items: Iterable[QNode]) -> QNode:
    return _nary(QAnd, BOT, TOP, items)


def q_disj(items: Iterable[QNode]) -> QNode:
    return _nary(QOr, TOP, BOT, items)


def q_implies(a: QNode, b: QNode) -> QNode:
    if a is TOP:
        return b
    if a is BOT or b is TOP or a is b:
        return TOP
    if b is BOT:
        return q_not(a)
    return _intern(QImplies, (a, b), left=a, right=b)


def q_iff(a: QNode, b: QNode) -> QNode:
    if a is TOP:
        return b
    if b is TOP:
        return a
    if a is BOT:
        return q_not(b)
    if b is BOT:
        return q_not(a)
    if a is b:
        return TOP
    if (isinstance(a, QNot) and a.arg is b) or (isinstance(b, QNot) and b.arg is a):
        return BOT
    return _intern(QIff, (a, b), left=a, right=b)


def _quant(cls, names: Iterable[str], body: QNode) -> QNode:
    if isinstance(body, QConst):
        return body
    fv = body.free_vars
    vs = tuple(dict.fromkeys(v for v in names if v in fv))
    if not vs:
        return body
    if type(body) is cls:
        inner = body.vars
        vs = vs + tuple(v for v in inner if v not in vs)
        body = body.body
    return _intern(cls, (vs, body), vars=vs, body=body)


def q_exists(names: Iterable[str], body: QNode) -> QNode:
    return _quant(QExists, names, body)


def q_forall(names: Iterable[str], body: QNode) -> QNode:
    return _quant(QForall, names, body)


def q_quant(exists: bool, names: Iterable[str], body: QNode) -> QNode:
    return _quant(QExists if exists else QForall, names, body)


def rebuild(node: QNode, kids: list[QNode]) -> QNode:
    """Rebuild ``node`` with new children through the smart constructors."""
    if isinstance(node, QNot):
        return q_not(kids[0])
    if isinstance(node, QAnd):
        return q_conj(kids)
    if isinstance(node, QOr):
        return q_disj(kids)
    if isinstance(node, QImplies):
        return q_implies(kids[0], kids[1])
    if isinstance(node, QIff):
        return q_iff(kids[0], kids[1])
    if isinstance(node, QQuant):
        return _quant(type(node), node.vars, kids[0])
    return node


# -- traversal helpers ----------------------------------------------------------


def iter_nodes(root: QNode):
    """Distinct nodes of the DAG, each once."""
    seen = set()
    stack = [root]
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        yield n
        stack.extend(n.children())


def tree_size(root: QNode) -> int:
    """Node count of the formula as a tree (shared subterms counted per use)."""
    sz = root._size
    if sz is not None:
        return sz
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if node._size is not None:
            continue
        kids = node.children()
        if not done:
            stack.append((node, True))
            stack.extend((c, False) for c in kids if c._size is None)
            continue
        node._size = 1 + sum(c._size for c in kids)
    return root._size


def dag_size(root: QNode) -> int:
    return sum(1 for _ in iter_nodes(root))


def quantified_vars(root: QNode) -> set[str]:
    out: set[str] = set()
    for n in iter_nodes(root):
        if isinstance(n, QQuant):
            out.update(n.vars)
    return out


def count_quantifiers(root: QNode) -> int:
    return sum(1 for n in iter_nodes(root) if isinstance(n, QQuant))


def is_prenex(root: QNode) -> bool:
    n = root
    while isinstance(n, QQuant):
        n = n.body
    return not n.has_quantifier


def transform(root: QNode, leaf) -> QNode:
    """Bottom-up rebuild; ``leaf(node)`` may return a replacement for any node
    (or None to recurse). Memoized on node identity, iterative."""
    memo: dict[int, QNode] = {}
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if not done:
            rep = leaf(node)
            if rep is not None:
                memo[key] = rep
                continue
            kids = node.children()
            if not kids:
                memo[key] = node
                continue
            stack.append((node, True))
            stack.extend((c, False) for c in kids if id(c) not in memo)
            continue
        memo[key] = rebuild(node, [memo[id(c)] for c in node.children()])
    return memo[id(root)]


def substitute(root: QNode, values: Mapping[str, bool | QNode]) -> QNode:
    """Replace free variables by constants or formulas (capture is the caller's concern)."""
    if not values:
        return root
    sub = {k: (const(v) if isinstance(v, bool) else v) for k, v in values.items()}
    keys = frozenset(sub)

    def leaf(node: QNode):
        if node.free_vars.isdisjoint(keys):
            return node
        if isinstance(node, QVar):
            return sub[node.name]
        if isinstance(node, QQuant) and keys.intersection(node.vars):
            inner = {k: v for k, v in sub.items() if k not in node.vars}
            return q_quant(node.exists, node.vars, substitute(node.body, inner))
        return None

    return transform(root, leaf)


def rename(root: QNode, mapping: Mapping[str, str]) -> QNode:
    """Rename variables everywhere (free and bound)."""
    if not mapping:
        return root
    keys = frozenset(mapping)

    def leaf(node: QNode):
        if isinstance(node, QVar):
            return var(mapping.get(node.name, node.name))
        if isinstance(node, QQuant):
            vs = [mapping.get(v, v) for v in node.vars]
            return q_quant(node.exists, vs, rename(node.body, mapping))
        if not node.has_quantifier and node.free_vars.isdisjoint(keys):
            return node
        return None

    return transform(root, leaf)


# -- semantics -----------------------------------------------------------------


def eval_qbf(valuation: Mapping[str, bool], f: QNode) -> bool:
    """Standard QBF semantics by exhaustive expansion of quantifiers."""
    missing = f.free_vars - set(valuation)
    if missing:
        raise QbfError(f"valuation does not cover free variables {sorted(missing)}")
    return _eval(f, dict(valuation))


def _eval(f: QNode, val: dict[str, bool]) -> bool:
    if isinstance(f, QConst):
        return f.value
    if isinstance(f, QVar):
        return val[f.name]
    if isinstance(f, QNot):
        return not _eval(f.arg, val)
    if isinstance(f, QAnd):
        return all(_eval(a, val) for a in f.args)
    if isinstance(f, QOr):
        return any(_eval(a, val) for a in f.args)
    if isinstance(f, QImplies):
        return (not _eval(f.left, val)) or _eval(f.right, val)
    if isinstance(f, QIff):
        return _eval(f.left, val) == _eval(f.right, val)
    if isinstance(f, QQuant):
        saved = {v: val[v] for v in f.vars if v in val}
        want = f.exists
        result = not want
        for bits in itertools.product((False, True), repeat=len(f.vars)):
            val.update(zip(f.vars, bits))
            if _eval(f.body, val) == want:
                result = want
                break
        for v in f.vars:
            val.pop(v, None)
        val.update(saved)
        return result
    raise TypeError(f"unexpected node {f!r}")


def simplify(f: QNode) -> QNode:
    """Equivalent formula with constants folded and trivial quantifiers resolved.

    Constant folding happens in the smart constructors already; here a quantified variable that
    occurs as a top-level literal of its body is fixed: ``exists x. (x & R)``
    becomes ``R[x:=1]`` and ``forall x. (x | R)`` becomes ``R[x:=0]``.
    The result is a fixed point (simplifying twice changes nothing).
    """
    prev = None
    cur = f
    while cur is not prev:
        prev = cur
        cur = _resolve_literals(cur)
    return cur


def _resolve_literals(f: QNode) -> QNode:
    memo: dict[int, QNode] = {}

    def go(node: QNode) -> QNode:
        r = memo.get(id(node))
        if r is not None:
            return r
        if not node.has_quantifier:
            r = node
        elif isinstance(node, QQuant):
            r = _quant_literals(node.exists, node.vars, go(node.body))
        else:
            r = rebuild(node, [go(c) for c in node.children()])
        memo[id(node)] = r
        return r

    return go(f)


def _quant_literals(exists: bool, names: tuple[str, ...], body: QNode) -> QNode:
    names = list(names)
    while True:
        # exists: literal conjuncts are forced; forall: literal disjuncts are forced
        group = QAnd if exists else QOr
        items = body.args if isinstance(body, group) else (body,)
        fixed = {}
        for a in items:
            if isinstance(a, QVar) and a.name in names:
                fixed.setdefault(a.name, exists)
            elif isinstance(a, QNot) and isinstance(a.arg, QVar) and a.arg.name in names:
                fixed.setdefault(a.arg.name, not exists)
        if not fixed:
            break
        body = substitute(body, fixed)
        names = [v for v in names if v not in fixed]
    return q_quant(exists, names, body)


# -- printing ------------------------------------------------------------------


def to_text(f: QNode) -> str:
    if isinstance(f, QConst):
        return "T" if f.value else "F"
    if isinstance(f, QVar):
        return f.name
    if isinstance(f, QNot):
        return "!" + _wrap(f.arg)
    if isinstance(f, QAnd):
        return " & ".join(_wrap(a) for a in f.args)
    if isinstance(f, QOr):
        return " | ".join(_wrap(a) for a in f.args)
    if isinstance(f, QImplies):
        return f"{_wrap(f.left)} -> {_wrap(f.right)}"
    if isinstance(f, QIff):
        return f"{_wrap(f.left)} <-> {_wrap(f.right)}"
    if isinstance(f, QQuant):
        q = "exists" if f.exists else "forall"
        return f"{q} {' '.join(f.vars)}. {_wrap(f.body)}"
    raise TypeError(f)


def _wrap(f: QNode) -> str:
    s = to_text(f)
    if isinstance(f, (QConst, QVar, QNot)):
        return s
    return f"({s})"


# -- raw construction (no folding) ---------------------------------------------
# Only for building formulas exactly as written, e.g. when a test needs a
# tautology such as x | !x to survive until it reaches an encoder.


def raw_not(a: QNode) -> QNode:
    return _intern(QNot, (a,), arg=a)


def raw_and(*args: QNode) -> QNode:
    return _intern(QAnd, tuple(args), args=tuple(args))


def raw_or(*args: QNode) -> QNode:
    return _intern(QOr, tuple(args), args=tuple(args))


def raw_implies(a: QNode, b: QNode) -> QNode:
    return _intern(QImplies, (a, b), left=a, right=b)


def raw_iff(a: QNode, b: QNode) -> QNode:
    return _intern(QIff, (a, b), left=a, right=b)


def raw_quant(exists: bool, names: Iterable[str], body: QNode) -> QNode:
    vs = tuple(names)
    cls = QExists if exists else QForall
    return _intern(cls, (vs, body), vars=vs, body=body)
