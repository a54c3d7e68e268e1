"""Semantics-preserving rewrites on QCTL formulas."""

from __future__ import annotations

from typing import Iterable

from . import formula as F
from .formula import (
    AF, AG, AU, AW, EF, EG, EU, EW, EX, AX, FALSE, TRUE,
    And, Atom, Const, Exists, Exists1, Forall, Forall1, Formula, Iff, Implies, Not, Or,
)


class NotPrenexError(ValueError):
    pass


class FreshNames:
    """Deterministic fresh proposition names of the form ``base_k``."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)

    def __call__(self, base: str) -> str:
        k = 1
        while f"{base}_{k}" in self.taken:
            k += 1
        name = f"{base}_{k}"
        self.taken.add(name)
        return name

    def reserve(self, name: str) -> None:
        self.taken.add(name)


# -- counting macros -----------------------------------------------------------


def _unique_f(phi: Formula, fresh: FreshNames) -> Formula:
    p = Atom(fresh("p"))
    return And(EF(phi), Forall(p.name, Implies(EF(And(p, phi)), AG(Implies(phi, p)))))


def _unique_x(phi: Formula, fresh: FreshNames) -> Formula:
    p = Atom(fresh("p"))
    return And(EX(phi), Forall(p.name, Or(AX(Implies(phi, p)), AX(Implies(phi, Not(p))))))


def _at_least_x(k: int, phi: Formula, fresh: FreshNames) -> Formula:
    ps = [Atom(fresh("p")) for _ in range(k)]
    parts = [
        EX(F.conj([p] + [Not(q) for q in ps if q is not p]))
        for p in ps
    ]
    parts.append(AX(Implies(F.disj(ps), phi)))
    body = F.conj(parts)
    for p in reversed(ps):
        body = Exists(p.name, body)
    return body


def expand_derived(f: Formula, reserved: Iterable[str] = (), expand_exists1: bool = False) -> Formula:
    """Rewrite the counting operators into plain quantified CTL.

    With ``expand_exists1`` the one-state quantifiers are also replaced by
    their definition through ``E=1F``; otherwise they are kept as nodes.
    """
    fresh = FreshNames(F.all_props(f) | set(reserved))

    def go(g: Formula) -> Formula:
        kids = g.children()
        if kids:
            g = g.rebuild(*(go(c) for c in kids))
        if isinstance(g, F.UniqueF):
            return _unique_f(g.arg, fresh)
        if isinstance(g, F.UniqueX):
            return _unique_x(g.arg, fresh)
        if isinstance(g, F.AtLeastX):
            return _at_least_x(g.k, g.arg, fresh)
        if isinstance(g, F.ExactlyX):
            return And(_at_least_x(g.k, g.arg, fresh), Not(_at_least_x(g.k + 1, g.arg, fresh)))
        if expand_exists1 and isinstance(g, Exists1):
            return Exists(g.prop, And(_unique_f(Atom(g.prop), fresh), g.body))
        if expand_exists1 and isinstance(g, Forall1):
            return Forall(g.prop, Implies(_unique_f(Atom(g.prop), fresh), g.body))
        return g

    return go(f)


def has_counting(f: Formula) -> bool:
    return any(isinstance(g, F.COUNTING) for g in F.walk(f))


# -- renaming ------------------------------------------------------------------


def rename_apart(f: Formula, reserved: Iterable[str] = ()) -> Formula:
    """Alpha-rename so every binder is distinct and avoids ``reserved``.

    Bound names also avoid every free proposition of ``f``.
    """
    used = set(reserved) | F.free_props(f)
    fresh = FreshNames(used | F.all_props(f))

    def go(g: Formula, env: dict[str, str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(env[g.name]) if g.name in env else g
        if isinstance(g, F.Quantifier):
            name = g.prop
            if name in used:
                name = fresh(g.prop)
            used.add(name)
            fresh.reserve(name)
            inner = dict(env)
            inner[g.prop] = name
            return type(g)(name, go(g.body, inner))
        kids = g.children()
        if not kids:
            return g
        return g.rebuild(*(go(c, env) for c in kids))

    return go(f, {})


# -- negation normal form ------------------------------------------------------


def to_nnf(f: Formula, keep_ag: bool = False) -> Formula:
    """Push negations down to atoms.

    Temporal operators of the result are EX, AX, EU, AU, EW, AW (plus AG when
    ``keep_ag``); EF/AF become untils and EG/AG weak untils with ``false``.
    """
    if has_counting(f):
        f = expand_derived(f)

    def ag(arg: Formula) -> Formula:
        return AG(arg) if keep_ag else AW(arg, FALSE)

    def go(g: Formula, neg: bool) -> Formula:
        if isinstance(g, Const):
            return Const(g.value != neg)
        if isinstance(g, Atom):
            return Not(g) if neg else g
        if isinstance(g, Not):
            return go(g.arg, not neg)
        if isinstance(g, And):
            return (Or if neg else And)(go(g.left, neg), go(g.right, neg))
        if isinstance(g, Or):
            return (And if neg else Or)(go(g.left, neg), go(g.right, neg))
        if isinstance(g, Implies):
            if neg:
                return And(go(g.left, False), go(g.right, True))
            return Or(go(g.left, True), go(g.right, False))
        if isinstance(g, Iff):
            a, b = g.left, g.right
            if neg:
                return Or(And(go(a, False), go(b, True)), And(go(a, True), go(b, False)))
            return Or(And(go(a, False), go(b, False)), And(go(a, True), go(b, True)))
        if isinstance(g, EX):
            return AX(go(g.arg, True)) if neg else EX(go(g.arg, False))
        if isinstance(g, AX):
            return EX(go(g.arg, True)) if neg else AX(go(g.arg, False))
        if isinstance(g, EF):
            return ag(go(g.arg, True)) if neg else EU(TRUE, go(g.arg, False))
        if isinstance(g, AF):
            return EW(go(g.arg, True), FALSE) if neg else AU(TRUE, go(g.arg, False))
        if isinstance(g, EG):
            return AU(TRUE, go(g.arg, True)) if neg else EW(go(g.arg, False), FALSE)
        if isinstance(g, AG):
            return EU(TRUE, go(g.arg, True)) if neg else ag(go(g.arg, False))
        if isinstance(g, (EU, AU, EW, AW)):
            if not neg:
                return type(g)(go(g.left, False), go(g.right, False))
            nb = go(g.right, True)
            stop = And(nb, go(g.left, True))
            dual = {EU: AW, AU: EW, EW: AU, AW: EU}[type(g)]
            return dual(nb, stop)
        if isinstance(g, F.Quantifier):
            cls = F.DUAL_QUANTIFIER[type(g)] if neg else type(g)
            return cls(g.prop, go(g.body, neg))
        raise TypeError(f"unexpected node {g!r}")

    return go(f, False)


def is_nnf(f: Formula) -> bool:
    for g in F.walk(f):
        if isinstance(g, Not) and not isinstance(g.arg, Atom):
            return False
        if isinstance(g, (Implies, Iff)):
            return False
    return True


# -- derived temporal operators -------------------------------------------------


def core_temporal(f: Formula, keep_ag: bool = False) -> Formula:
    """Rewrite EF/AF/EG/AG/EW/AW through EU/AU (and negation).

    EX and AX are kept; AG is kept when ``keep_ag``.
    """

    def go(g: Formula) -> Formula:
        kids = g.children()
        if kids:
            g = g.rebuild(*(go(c) for c in kids))
        if isinstance(g, EF):
            return EU(TRUE, g.arg)
        if isinstance(g, AF):
            return AU(TRUE, g.arg)
        if isinstance(g, EG):
            return Not(AU(TRUE, Not(g.arg)))
        if isinstance(g, AG) and not keep_ag:
            return Not(EU(TRUE, Not(g.arg)))
        if isinstance(g, EW):
            return Not(AU(Not(g.right), And(Not(g.right), Not(g.left))))
        if isinstance(g, AW):
            return Not(EU(Not(g.right), And(Not(g.right), Not(g.left))))
        return g

    return go(f)


# -- prenex form ---------------------------------------------------------------


def split_prenex(f: Formula) -> tuple[list[tuple[type, str]], Formula]:
    """Split a prenex formula into its quantifier prefix and CTL matrix."""
    prefix = []
    while isinstance(f, F.Quantifier):
        prefix.append((type(f), f.prop))
        f = f.body
    for g in F.walk(f):
        if isinstance(g, F.QUANTIFIERS):
            raise NotPrenexError(f"quantifier '{g.keyword} {g.prop}' occurs inside the matrix; "
                                 "formula must be in prenex normal form")
        if isinstance(g, F.COUNTING):
            raise NotPrenexError("counting operators expand to nested quantifiers; "
                                 "formula must be in prenex normal form")
    return prefix, f


def join_prefix(prefix: Iterable[tuple[type, str]], matrix: Formula) -> Formula:
    out = matrix
    for cls, p in reversed(list(prefix)):
        out = cls(p, out)
    return out


def is_prenex(f: Formula) -> bool:
    try:
        split_prenex(f)
    except NotPrenexError:
        return False
    return True


def prepare(f: Formula, reserved: Iterable[str] = ()) -> Formula:
    """Expand counting operators, then rename binders apart from ``reserved``."""
    return rename_apart(expand_derived(f, reserved), reserved)
