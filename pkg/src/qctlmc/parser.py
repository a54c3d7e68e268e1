"""Recursive-descent parser for the QCTL concrete syntax.

Precedence, loosest first: ``<->`` (left), ``->`` (right), ``|``, ``&``,
then prefix operators (``!``, quantifiers, ``EX``/``AX``/``EF``/``AF``/
``EG``/``AG`` and the counting operators). Until/weak-until are bracketed:
``E[a U b]``, ``A[a W b]``.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from . import formula as F


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        super().__init__(f"{message} at position {pos}")


class Token(NamedTuple):
    kind: str
    value: str
    pos: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<atleast>E>=(?P<k1>\d+)\s*X)
  | (?P<exactly>E=(?P<k2>\d+)\s*(?P<ek>[XF]))
  | (?P<path>[EA])\[
  | (?P<iff><->)
  | (?P<imp>->)
  | (?P<sym>[!&|().\]])
  | (?P<ident>[A-Za-z0-9_]+)
    """,
    re.VERBOSE,
)

_UNARY = {"EX": F.EX, "AX": F.AX, "EF": F.EF, "AF": F.AF, "EG": F.EG, "AG": F.AG}
_QUANT = {"exists": F.Exists, "forall": F.Forall, "exists1": F.Exists1, "forall1": F.Forall1}
_RESERVED = set(_UNARY) | set(_QUANT) | {"true", "false", "U", "W"}


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind == "ws":
            pass
        elif m.group("atleast"):
            out.append(Token("atleast", m.group("k1"), pos))
        elif m.group("exactly"):
            k, which = m.group("k2"), m.group("ek")
            if which == "F":
                if k != "1":
                    raise FormulaSyntaxError("only E=1F is supported", pos, text)
                out.append(Token("uniqueF", k, pos))
            else:
                out.append(Token("exactly", k, pos))
        elif m.group("path"):
            out.append(Token("path", m.group("path"), pos))
        elif kind in ("iff", "imp"):
            out.append(Token(m.group(kind), m.group(kind), pos))
        elif kind == "sym":
            out.append(Token(m.group(kind), m.group(kind), pos))
        else:
            word = m.group("ident")
            out.append(Token("kw" if word in _RESERVED else "ident", word, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return FormulaSyntaxError(msg, tok.pos, self.text)

    def eat(self, kind: str, value: str | None = None) -> Token:
        t = self.tok
        if t.kind != kind or (value is not None and t.value != value):
            want = value or kind
            got = t.value or t.kind
            raise self.error(f"expected {want!r}, found {got!r}")
        self.i += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def parse(self) -> F.Formula:
        f = self.iff()
        if not self.at("eof"):
            raise self.error(f"unexpected {self.tok.value!r}")
        return f

    def iff(self) -> F.Formula:
        f = self.implies()
        while self.at("<->"):
            self.i += 1
            f = F.Iff(f, self.implies())
        return f

    def implies(self) -> F.Formula:
        f = self.disjunction()
        if self.at("->"):
            self.i += 1
            return F.Implies(f, self.implies())
        return f

    def disjunction(self) -> F.Formula:
        f = self.conjunction()
        while self.at("|"):
            self.i += 1
            f = F.Or(f, self.conjunction())
        return f

    def conjunction(self) -> F.Formula:
        f = self.unary()
        while self.at("&"):
            self.i += 1
            f = F.And(f, self.unary())
        return f

    def unary(self) -> F.Formula:
        t = self.tok
        if t.kind == "!":
            self.i += 1
            return F.Not(self.unary())
        if t.kind == "kw" and t.value in _UNARY:
            self.i += 1
            return _UNARY[t.value](self.unary())
        if t.kind == "kw" and t.value in _QUANT:
            self.i += 1
            prop = self.eat("ident").value
            self.eat(".")
            return _QUANT[t.value](prop, self.unary())
        if t.kind == "uniqueF":
            self.i += 1
            return F.UniqueF(self.unary())
        if t.kind in ("atleast", "exactly"):
            self.i += 1
            k = int(t.value)
            if k < 1:
                raise self.error("counting bound must be at least 1", t)
            arg = self.unary()
            if t.kind == "atleast":
                return F.AtLeastX(k, arg)
            return F.UniqueX(arg) if k == 1 else F.ExactlyX(k, arg)
        return self.primary()

    def primary(self) -> F.Formula:
        t = self.tok
        if t.kind == "(":
            self.i += 1
            f = self.iff()
            self.eat(")")
            return f
        if t.kind == "path":
            self.i += 1
            left = self.iff()
            op = self.tok
            if not (op.kind == "kw" and op.value in ("U", "W")):
                raise self.error("expected 'U' or 'W'")
            self.i += 1
            right = self.iff()
            self.eat("]")
            cls = {("E", "U"): F.EU, ("A", "U"): F.AU, ("E", "W"): F.EW, ("A", "W"): F.AW}
            return cls[(t.value, op.value)](left, right)
        if t.kind == "kw" and t.value in ("true", "false"):
            self.i += 1
            return F.TRUE if t.value == "true" else F.FALSE
        if t.kind == "ident":
            self.i += 1
            return F.Atom(t.value)
        if t.kind == "eof":
            raise self.error("unexpected end of formula")
        if t.kind == "kw" and t.value in _UNARY:
            raise self.error(f"{t.value} needs an operand")
        raise self.error(f"unexpected {t.value!r}")


def parse_formula(text: str) -> F.Formula:
    return _Parser(text).parse()
