"""Benchmark families: k-connectivity grids, Nim games, resource placement."""

from __future__ import annotations

from collections import deque
from typing import Sequence

from . import formula as F
from .formula import AG, AF, EU, EX, And, Atom, Implies, Not, Or
from .kripke import KripkeStructure

KCONN_VARIANTS = ("phi", "psi", "phi_g", "psi_g")
KCONN_READINGS = ("as-printed", "negated")


class BenchError(ValueError):
    pass


# -- k-connectivity -------------------------------------------------------------------


def kconn_bridges(n: int, m: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Bridge i joins q(i,n)-r(1,i) for odd i and q(n,i)-r(i,1) for even i."""
    out = []
    for i in range(1, m + 1):
        if i % 2:
            out.append(((i, n), (1, i)))
        else:
            out.append(((n, i), (i, 1)))
    return out


def gen_kconn(n: int, m: int) -> tuple[KripkeStructure, str, str]:
    if n < 2 or not 1 <= m <= n:
        raise BenchError(f"gen_kconn needs n >= 2 and 1 <= m <= n, got n={n}, m={m}")
    q = lambda i, j: f"q_{i}_{j}"
    r = lambda i, j: f"r_{i}_{j}"
    cells = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    vertices = [q(i, j) for i, j in cells] + [r(i, j) for i, j in cells]
    und: set[frozenset] = set()

    def link(a: str, b: str) -> None:
        if a != b:
            und.add(frozenset((a, b)))

    for name in (q, r):
        for i, j in cells:
            if i < n:
                link(name(i, j), name(i + 1, j))
            if j < n:
                link(name(i, j), name(i, j + 1))
    for t in range(2, n + 1):
        link(q(1, 1), q(1, t))
        link(q(1, 1), q(t, 1))
        link(r(n, t - 1), r(n, n))
        link(r(t - 1, n), r(n, n))
    for (a, b), (c, d) in kconn_bridges(n, m):
        link(q(a, b), r(c, d))
    order = {v: i for i, v in enumerate(vertices)}
    edges = []
    for e in und:
        a, b = sorted(e, key=order.__getitem__)
        edges += [(a, b), (b, a)]
    edges.sort(key=lambda e: (order[e[0]], order[e[1]]))
    init = q(1, 1)
    K = KripkeStructure(vertices, edges, {r(n, n): ["y"]}, init=init)
    return K, init, "y"


def kconn_formula(variant: str, k: int, reading: str = "as-printed") -> F.Formula:
    """The k-connectivity formulas with k-1 marker propositions p_1 .. p_{k-1}."""
    if variant not in KCONN_VARIANTS:
        raise BenchError(f"unknown variant {variant!r}")
    if reading not in KCONN_READINGS:
        raise BenchError(f"unknown reading {reading!r}")
    if k < 1:
        raise BenchError("k must be at least 1")
    ps = [f"p{i}" for i in range(1, k)]
    y = Atom("y")
    avoid = EX(EU(F.conj([Not(Atom(p)) for p in ps]), y))
    if variant in ("psi", "psi_g"):
        body = AG(avoid) if variant == "psi_g" else avoid
        for p in reversed(ps):
            body = F.Forall1(p, body)
    else:
        paths = []
        for p in ps:
            others = [Atom(o) if reading == "as-printed" else Not(Atom(o)) for o in ps if o != p]
            paths.append(EX(EU(F.conj([Atom(p)] + others), y)))
        body = F.conj(paths + [avoid])
        if variant == "phi_g":
            body = AG(body)
        for p in reversed(ps):
            body = F.Exists(p, body)
    if variant.endswith("_g"):
        body = F.Forall1("y", body)
    return body


# -- Nim ---------------------------------------------------------------------------------


def _canon(heaps) -> tuple[int, ...]:
    return tuple(sorted((h for h in heaps if h > 0), reverse=True))


def _config_name(heaps: tuple[int, ...], turn: int) -> str:
    return "c_t%d%s" % (turn, "".join(f"_{h}" for h in heaps))


def nim_moves(heaps: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Distinct canonical successor heap multisets, in a fixed order."""
    out = []
    for i, h in enumerate(heaps):
        if i and heaps[i - 1] == h:
            continue
        for take in range(1, h + 1):
            nxt = _canon(heaps[:i] + (h - take,) + heaps[i + 1:])
            if nxt not in out:
                out.append(nxt)
    return out


def gen_nim(heaps: Sequence[int], J: int = 1) -> tuple[KripkeStructure, str]:
    """Game graph for player J; J's moves go through an ``int`` state.

    Heap multisets are canonical (sorted descending, empty heaps dropped),
    The terminal configuration self-loops, through an intermediary when it
    is J's turn. These two conventions reproduce the published state counts.
    """
    if not heaps or any(h < 1 for h in heaps):
        raise BenchError("heaps must be a non-empty list of positive sizes")
    if J not in (1, 2):
        raise BenchError("J must be 1 or 2")
    start = (_canon(heaps), 1)
    vertices, edges, labels = [], [], {}
    seen = {start}
    queue = deque([start])
    while queue:
        hs, turn = queue.popleft()
        name = _config_name(hs, turn)
        vertices.append(name)
        labels[name] = [f"t{turn}"]
        if not hs:
            # the player who is not on turn removed the last object
            labels[name].append(f"w{3 - turn}")
            if turn == J:
                # J's forced pass also goes through an intermediary
                mid = f"i_{name}__{name}"
                vertices.append(mid)
                labels[mid] = ["int"]
                edges += [(name, mid), (mid, name)]
            else:
                edges.append((name, name))
            continue
        for nxt in nim_moves(hs):
            succ = (nxt, 3 - turn)
            target = _config_name(*succ)
            if turn == J:
                mid = f"i_{name}__{target}"
                vertices.append(mid)
                labels[mid] = ["int"]
                edges += [(name, mid), (mid, target)]
            else:
                edges.append((name, target))
            if succ not in seen:
                seen.add(succ)
                queue.append(succ)
    init = _config_name(*start)
    return KripkeStructure(vertices, edges, labels, init=init), init


def nim_formula(J: int = 1) -> F.Formula:
    if J not in (1, 2):
        raise BenchError("J must be 1 or 2")
    m = Atom("m")
    return F.Exists("m", And(AG(Implies(Atom(f"t{J}"), EX(m))),
                             AF(Or(Atom(f"w{J}"), And(Atom("int"), Not(m))))))


def nim_total(heaps: Sequence[int]) -> int:
    return sum(heaps)


def nim_bound(heaps: Sequence[int]) -> int:
    """ceil(3n/2) for n objects in total."""
    n = nim_total(heaps)
    return (3 * n + 1) // 2


# -- resources --------------------------------------------------------------------------


def gen_resources(n: int, k_cols: int) -> tuple[KripkeStructure, str]:
    """n rows by k_cols columns; right and down moves, wrapping around."""
    if n < 2 or k_cols < 2:
        raise BenchError("gen_resources needs n, k_cols >= 2")
    name = lambda i, j: f"s_{i}_{j}"
    vertices = [name(i, j) for i in range(n) for j in range(k_cols)]
    edges = []
    for i in range(n):
        for j in range(k_cols):
            edges.append((name(i, j), name(i, (j + 1) % k_cols)))
            edges.append((name(i, j), name((i + 1) % n, j)))
    init = name(0, 0)
    return KripkeStructure(vertices, edges, {}, init=init), init


def resources_formula(k: int, d: int) -> F.Formula:
    """Exists1 c_1 .. c_k. AG(C | EX(C | EX(... C))) with d nested EX, C = c_1 | .. | c_k."""
    if k < 1 or d < 1:
        raise BenchError("k and d must be at least 1")
    cs = [f"c{i}" for i in range(1, k + 1)]
    C = F.disj([Atom(c) for c in cs])
    body = C
    for _ in range(d):
        body = Or(C, EX(body))
    out = AG(body)
    for c in reversed(cs):
        out = F.Exists1(c, out)
    return out

