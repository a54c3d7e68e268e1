"""QCTL abstract syntax, printing and structural measures."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import ClassVar, Iterable, Iterator, NamedTuple


@dataclass(frozen=True)
class Formula:
    _kids: ClassVar[tuple] = ()

    def children(self) -> tuple["Formula", ...]:
        return tuple(getattr(self, k) for k in self._kids)

    def rebuild(self, *kids: "Formula") -> "Formula":
        if kids == self.children():
            return self
        return replace(self, **dict(zip(self._kids, kids)))

    def __str__(self) -> str:
        return to_text(self)

    # operator sugar, handy in tests and generators
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Implies(self, other)


def _node(*kids):
    def deco(cls):
        cls = dataclass(frozen=True, repr=False)(cls)
        cls._kids = kids
        return cls
    return deco


@_node()
class Const(Formula):
    value: bool = True

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@_node()
class Atom(Formula):
    name: str = ""

    def __repr__(self):
        return f"Atom({self.name!r})"


class _Repr:
    def __repr__(self):
        vals = [repr(getattr(self, f.name)) for f in fields(self) if f.name != "_kids"]
        return f"{type(self).__name__}({', '.join(vals)})"


@_node("arg")
class Not(_Repr, Formula):
    arg: Formula = TRUE


@_node("left", "right")
class And(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


@_node("left", "right")
class Or(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


@_node("left", "right")
class Implies(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


@_node("left", "right")
class Iff(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


@_node("arg")
class EX(_Repr, Formula):
    arg: Formula = TRUE


@_node("arg")
class AX(_Repr, Formula):
    arg: Formula = TRUE


@_node("arg")
class EF(_Repr, Formula):
    arg: Formula = TRUE


@_node("arg")
class AF(_Repr, Formula):
    arg: Formula = TRUE


@_node("arg")
class EG(_Repr, Formula):
    arg: Formula = TRUE


@_node("arg")
class AG(_Repr, Formula):
    arg: Formula = TRUE


@_node("left", "right")
class EU(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


@_node("left", "right")
class AU(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


@_node("left", "right")
class EW(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


@_node("left", "right")
class AW(_Repr, Formula):
    left: Formula = TRUE
    right: Formula = TRUE


class Quantifier(_Repr, Formula):
    prop: str
    body: Formula
    keyword = ""


@_node("body")
class Exists(Quantifier):
    prop: str = ""
    body: Formula = TRUE
    keyword = "exists"


@_node("body")
class Forall(Quantifier):
    prop: str = ""
    body: Formula = TRUE
    keyword = "forall"


@_node("body")
class Exists1(Quantifier):
    """Existential choice of exactly one reachable state."""
    prop: str = ""
    body: Formula = TRUE
    keyword = "exists1"


@_node("body")
class Forall1(Quantifier):
    prop: str = ""
    body: Formula = TRUE
    keyword = "forall1"


@_node("arg")
class UniqueF(_Repr, Formula):
    arg: Formula = TRUE


@_node("arg")
class UniqueX(_Repr, Formula):
    arg: Formula = TRUE


@_node("arg")
class AtLeastX(_Repr, Formula):
    k: int = 1
    arg: Formula = TRUE


@_node("arg")
class ExactlyX(_Repr, Formula):
    k: int = 1
    arg: Formula = TRUE


TEMPORAL_UNARY = (EX, AX, EF, AF, EG, AG)
TEMPORAL_BINARY = (EU, AU, EW, AW)
COUNTING = (UniqueF, UniqueX, AtLeastX, ExactlyX)
TEMPORAL = TEMPORAL_UNARY + TEMPORAL_BINARY + COUNTING
BOOLEAN = (Const, Atom, Not, And, Or, Implies, Iff)
QUANTIFIERS = (Exists, Forall, Exists1, Forall1)
DUAL_QUANTIFIER = {Exists: Forall, Forall: Exists, Exists1: Forall1, Forall1: Exists1}


def is_temporal(f: Formula) -> bool:
    return isinstance(f, TEMPORAL)


# -- builders -----------------------------------------------------------------


def conj(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; empty conjunction is ``true``."""
    items = list(items)
    if not items:
        return TRUE
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


def disj(items: Iterable[Formula]) -> Formula:
    items = list(items)
    if not items:
        return FALSE
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


def atoms(*names: str) -> list[Atom]:
    return [Atom(n) for n in names]


# -- traversal ----------------------------------------------------------------


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order iteration over all nodes."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def all_props(f: Formula) -> set[str]:
    """Every proposition name occurring in ``f``, bound or free."""
    out = set()
    for g in walk(f):
        if isinstance(g, Atom):
            out.add(g.name)
        elif isinstance(g, Quantifier):
            out.add(g.prop)
    return out


def free_props(f: Formula) -> set[str]:
    out: set[str] = set()

    def go(g: Formula, bound: frozenset[str]):
        if isinstance(g, Atom):
            if g.name not in bound:
                out.add(g.name)
        elif isinstance(g, Quantifier):
            go(g.body, bound | {g.prop})
        else:
            for c in g.children():
                go(c, bound)

    go(f, frozenset())
    return out


def bound_props(f: Formula) -> set[str]:
    return {g.prop for g in walk(f) if isinstance(g, Quantifier)}


def has_quantifier(f: Formula) -> bool:
    return any(isinstance(g, QUANTIFIERS) for g in walk(f))


def substitute(f: Formula, mapping: dict[str, Formula]) -> Formula:
    """Replace free atoms by formulas (no capture check; callers rename apart)."""
    if isinstance(f, Atom):
        return mapping.get(f.name, f)
    if isinstance(f, Quantifier) and f.prop in mapping:
        mapping = {k: v for k, v in mapping.items() if k != f.prop}
    kids = f.children()
    if not kids:
        return f
    return f.rebuild(*(substitute(c, mapping) for c in kids))


# -- measures -------------------------------------------------------------------


class FormulaMetrics(NamedTuple):
    size: int
    temporal_height: int
    quantifier_count: int
    quantified_props: frozenset


def size(f: Formula) -> int:
    """Node count: atoms count 1, every operator adds 1 to its operands."""
    return sum(1 for _ in walk(f))


def temporal_height(f: Formula) -> int:
    kids = f.children()
    h = max((temporal_height(c) for c in kids), default=0)
    return h + 1 if is_temporal(f) else h


def metrics(f: Formula) -> FormulaMetrics:
    qs = [g for g in walk(f) if isinstance(g, Quantifier)]
    return FormulaMetrics(
        size=size(f),
        temporal_height=temporal_height(f),
        quantifier_count=len(qs),
        quantified_props=frozenset(q.prop for q in qs),
    )


def subterm(f: Formula, path: tuple[int, ...]) -> Formula:
    g = f
    for i in path:
        kids = g.children()
        if not 0 <= i < len(kids):
            raise IndexError(f"invalid path {path!r} for {to_text(f)}")
        g = kids[i]
    return g


def temporal_depth(f: Formula, path: tuple[int, ...]) -> int:
    """Number of temporal operators strictly above the node at ``path``."""
    depth = 0
    g = f
    for i in path:
        kids = g.children()
        if not 0 <= i < len(kids):
            raise IndexError(f"invalid path {path!r} for {to_text(f)}")
        if is_temporal(g):
            depth += 1
        g = kids[i]
    return depth


class Occurrence(NamedTuple):
    path: tuple[int, ...]
    formula: Formula
    temporal: bool


def subformulas(f: Formula) -> list[Occurrence]:
    """All subformula occurrences in post-order."""
    out: list[Occurrence] = []

    def go(g: Formula, path: tuple[int, ...]):
        for i, c in enumerate(g.children()):
            go(c, path + (i,))
        out.append(Occurrence(path, g, is_temporal(g)))

    go(f, ())
    return out


# -- printing -----------------------------------------------------------------

_UNARY_KW = {EX: "EX", AX: "AX", EF: "EF", AF: "AF", EG: "EG", AG: "AG", UniqueF: "E=1F", UniqueX: "E=1X"}
_BRACKET = {EU: ("E", "U"), AU: ("A", "U"), EW: ("E", "W"), AW: ("A", "W")}
_BINOP = {And: (" & ", 4), Or: (" | ", 3), Implies: (" -> ", 2), Iff: (" <-> ", 1)}


def _prec(f: Formula) -> int:
    op = _BINOP.get(type(f))
    return op[1] if op else 5


def to_text(f: Formula) -> str:
    """Render in the concrete formula grammar accepted by ``parse_formula``."""

    def wrap(g: Formula, need: int) -> str:
        s = to_text(g)
        return f"({s})" if _prec(g) < need else s

    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return "!" + wrap(f.arg, 5)
    if type(f) in _UNARY_KW:
        return _UNARY_KW[type(f)] + " " + wrap(f.arg, 5)
    if isinstance(f, AtLeastX):
        return f"E>={f.k}X " + wrap(f.arg, 5)
    if isinstance(f, ExactlyX):
        return f"E={f.k}X " + wrap(f.arg, 5)
    if type(f) in _BRACKET:
        path, op = _BRACKET[type(f)]
        return f"{path}[{to_text(f.left)} {op} {to_text(f.right)}]"
    if isinstance(f, Quantifier):
        return f"{f.keyword} {f.prop}. " + wrap(f.body, 5)
    sym, p = _BINOP[type(f)]
    if isinstance(f, Implies):
        return wrap(f.left, p + 1) + sym + wrap(f.right, p)
    return wrap(f.left, p) + sym + wrap(f.right, p + 1)
