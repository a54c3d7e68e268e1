"""Fixed-point elimination of until and the two flattening transforms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import formula as F
from .formula import AG, AU, AW, EU, EW, EX, AX, FALSE, TRUE, And, Atom, Formula, Iff, Implies, Not, Or
from .rewrite import FreshNames, expand_derived, has_counting, join_prefix, split_prenex, to_nnf

BOOLEAN = "boolean"
LFP = "lfp"


def fpc(f: Formula, reserved: Iterable[str] = ()) -> Formula:
    """Replace every until by its fixed-point characterisation.

    EU/AU become ``forall z. (AG(z <-> (psi | (phi & EX z))) -> z)`` (AX for
    AU). EW/AW use the greatest fixed point instead, ``exists z. (AG(z <->
    ...) & z)``, which avoids duplicating ``psi``. The output only contains
    EX, AX and AG as temporal operators.
    """
    if has_counting(f):
        f = expand_derived(f, reserved)
    fresh = FreshNames(F.all_props(f) | set(reserved))

    def fix(left: Formula, right: Formula, step, least: bool) -> Formula:
        z = Atom(fresh("z"))
        eq = AG(Iff(z, Or(right, And(left, step(z)))))
        if least:
            return F.Forall(z.name, Implies(eq, z))
        return F.Exists(z.name, And(eq, z))

    def go(g: Formula) -> Formula:
        kids = g.children()
        if kids:
            g = g.rebuild(*(go(c) for c in kids))
        if isinstance(g, F.EF):
            return fix(TRUE, g.arg, EX, True)
        if isinstance(g, F.AF):
            return fix(TRUE, g.arg, AX, True)
        if isinstance(g, F.EG):
            return Not(fix(TRUE, Not(g.arg), AX, True))
        if isinstance(g, EU):
            return fix(g.left, g.right, EX, True)
        if isinstance(g, AU):
            return fix(g.left, g.right, AX, True)
        if isinstance(g, EW):
            return fix(g.left, g.right, EX, False)
        if isinstance(g, AW):
            return fix(g.left, g.right, AX, False)
        return g

    return go(f)


@dataclass(frozen=True)
class Clause:
    kappa: str
    connective: str  # "iff" or "implies"
    theta: Formula

    def to_formula(self) -> Formula:
        k = Atom(self.kappa)
        return AG(Iff(k, self.theta) if self.connective == "iff" else Implies(k, self.theta))


@dataclass(frozen=True)
class FlatFormula:
    prefix: tuple  # ((quantifier class, prop), ...)
    kappa_props: tuple  # ((name, mode), ...)
    phi0: Formula
    clauses: tuple  # (Clause, ...)

    @property
    def modes(self) -> dict[str, str]:
        return dict(self.kappa_props)

    def body(self) -> Formula:
        return F.conj([self.phi0] + [c.to_formula() for c in self.clauses])

    def to_formula(self) -> Formula:
        """The equivalent QCTL formula ``Q exists k1..km. (phi0 & AG(...) & ...)``."""
        out = self.body()
        for name, _ in reversed(self.kappa_props):
            out = F.Exists(name, out)
        return join_prefix(self.prefix, out)


class _Extractor:
    def __init__(self, taken: Iterable[str], connective: str):
        self.fresh = FreshNames(taken)
        self.connective = connective
        self.by_theta: dict[Formula, str] = {}
        self.kappas: list[tuple[str, str]] = []
        self.clauses: list[Clause] = []

    def kappa(self, theta: Formula) -> Atom:
        name = self.by_theta.get(theta)
        if name is None:
            name = self.fresh("k")
            self.by_theta[theta] = name
            mode = LFP if self.connective == "implies" and isinstance(theta, (EU, AU)) else BOOLEAN
            self.kappas.append((name, mode))
            self.clauses.append(Clause(name, self.connective, theta))
        return Atom(name)


def flatten_equiv(f: Formula, reserved: Iterable[str] = ()) -> FlatFormula:
    """Flat form with defining equivalences ``AG(k <-> theta)``.

    Every temporal subformula below another temporal operator gets its own
    proposition; the top-level temporal operators stay in ``phi0``.
    """
    prefix, matrix = split_prenex(f)
    ex = _Extractor(F.all_props(f) | set(reserved), "iff")

    def go(g: Formula, under: bool) -> Formula:
        temporal = F.is_temporal(g)
        kids = g.children()
        if kids:
            g = g.rebuild(*(go(c, under or temporal) for c in kids))
        if temporal and under:
            return ex.kappa(g)
        return g

    phi0 = go(matrix, False)
    return FlatFormula(tuple(prefix), tuple(ex.kappas), phi0, tuple(ex.clauses))


def flatten_nnf(f: Formula, reserved: Iterable[str] = ()) -> FlatFormula:
    """Flat form in negation normal form with implications ``AG(k -> theta)``.

    ``phi0`` keeps only top-level EX, AX and AG; every other modality, and
    every modality below another one, is extracted. Nested AG is first
    turned into ``A[. W false]`` so that its clause stays linear.
    """
    prefix, matrix = split_prenex(f)
    matrix = to_nnf(matrix, keep_ag=True)
    ex = _Extractor(F.all_props(f) | set(reserved), "implies")

    def go(g: Formula, under: bool) -> Formula:
        temporal = F.is_temporal(g)
        if temporal and under and isinstance(g, AG):
            g = AW(g.arg, FALSE)
        kids = g.children()
        if kids:
            g = g.rebuild(*(go(c, under or temporal) for c in kids))
        if temporal and (under or isinstance(g, (EU, AU, EW, AW))):
            return ex.kappa(g)
        return g

    phi0 = go(matrix, False)
    return FlatFormula(tuple(prefix), tuple(ex.kappas), phi0, tuple(ex.clauses))


def is_basic(theta: Formula) -> bool:
    """One temporal operator applied to Boolean combinations of atoms."""
    if not F.is_temporal(theta):
        return False
    return all(not F.is_temporal(g) and not isinstance(g, F.QUANTIFIERS)
               for c in theta.children() for g in F.walk(c))


def kappa_negations_ok(flat: FlatFormula) -> bool:
    """Each kappa occurs negated only as the guard of its own clause."""
    names = {k for k, _ in flat.kappa_props}
    parts = [flat.phi0] + [c.theta for c in flat.clauses]
    for part in parts:
        for g in F.walk(part):
            if isinstance(g, Not) and isinstance(g.arg, Atom) and g.arg.name in names:
                return False
    return True
