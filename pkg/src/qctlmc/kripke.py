"""Kripke structures: representation, text format, graph queries."""

from __future__ import annotations

import re
from collections import deque
from typing import Iterable, Mapping


class KripkeError(ValueError):
    """Malformed or invalid Kripke structure."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownVertexError(KripkeError, KeyError):
    pass


_ID = re.compile(r"^[A-Za-z0-9_.]+$")


class KripkeStructure:
    """Finite Kripke structure with a total edge relation.

    Vertices keep their declaration order; that order is used everywhere a
    canonical enumeration of states is needed (quantifier expansion,
    bit-vector indices, emitted variable order).

    Instances are never mutated after construction. The reachability cache
    is filled lazily but only memoizes a pure function.
    """

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[tuple[str, str]],
        labels: Mapping[str, Iterable[str]] | None = None,
        init: str | None = None,
    ):
        self.vertices: tuple[str, ...] = tuple(vertices)
        if not self.vertices:
            raise KripkeError("structure has no states")
        self._index: dict[str, int] = {}
        for i, v in enumerate(self.vertices):
            if not v or not _ID.match(v):
                raise KripkeError(f"invalid state identifier {v!r}")
            if v in self._index:
                raise KripkeError(f"duplicate state {v!r}")
            self._index[v] = i

        edge_set = set()
        for a, b in edges:
            for end in (a, b):
                if end not in self._index:
                    raise KripkeError(f"edge {a}->{b} uses undeclared state {end!r}")
            edge_set.add((a, b))
        self.edges: frozenset[tuple[str, str]] = frozenset(edge_set)

        labels = labels or {}
        for v in labels:
            if v not in self._index:
                raise KripkeError(f"label for undeclared state {v!r}")
        self.labels: dict[str, frozenset[str]] = {
            v: frozenset(labels.get(v, ())) for v in self.vertices
        }

        succ: dict[str, list[str]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            succ[a].append(b)
        for v in self.vertices:
            if not succ[v]:
                raise KripkeError(f"state {v!r} has no successor (edge relation must be total)")
        # successor lists follow declaration order so translations are reproducible
        self._succ = {v: tuple(sorted(s, key=self._index.__getitem__)) for v, s in succ.items()}

        if init is None:
            init = self.vertices[0]
        if init not in self._index:
            raise KripkeError(f"initial state {init!r} is not declared")
        self.init = init
        self._reach: dict[str, frozenset[str]] = {}

    # -- basic accessors ----------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def size(self) -> int:
        return len(self.vertices) + len(self.edges)

    def index(self, v: str) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise UnknownVertexError(f"unknown state {v!r}") from None

    def __contains__(self, v: object) -> bool:
        return v in self._index

    def label(self, v: str) -> frozenset[str]:
        self.index(v)
        return self.labels[v]

    def propositions(self) -> frozenset[str]:
        out: set[str] = set()
        for ls in self.labels.values():
            out |= ls
        return frozenset(out)

    def successors(self, v: str) -> tuple[str, ...]:
        """Successors of ``v`` in declaration order (never empty)."""
        self.index(v)
        return self._succ[v]

    def reachable(self, v: str) -> frozenset[str]:
        """Reflexive-transitive closure of the edge relation from ``v``."""
        self.index(v)
        cached = self._reach.get(v)
        if cached is not None:
            return cached
        seen = {v}
        queue = deque([v])
        while queue:
            x = queue.popleft()
            for y in self._succ[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        result = frozenset(seen)
        self._reach[v] = result
        return result

    def reachable_ordered(self, v: str) -> list[str]:
        r = self.reachable(v)
        return [x for x in self.vertices if x in r]

    def restrict(self, keep: Iterable[str], init: str | None = None) -> "KripkeStructure":
        """Sub-structure induced by a successor-closed vertex set."""
        keep = set(keep)
        verts = [v for v in self.vertices if v in keep]
        edges = [(a, b) for a, b in self.edges if a in keep and b in keep]
        labels = {v: self.labels[v] for v in verts}
        return KripkeStructure(verts, edges, labels, init or (self.init if self.init in keep else verts[0]))

    def with_labels(self, labels: Mapping[str, Iterable[str]]) -> "KripkeStructure":
        return KripkeStructure(self.vertices, self.edges, labels, self.init)

    # -- comparison -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KripkeStructure):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.edges == other.edges
            and self.labels == other.labels
            and self.init == other.init
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    def __repr__(self) -> str:
        return f"KripkeStructure(|V|={len(self.vertices)}, |E|={len(self.edges)}, init={self.init!r})"


def successors(K: KripkeStructure, x: str) -> frozenset[str]:
    return frozenset(K.successors(x))


def reachable(K: KripkeStructure, x: str) -> frozenset[str]:
    return K.reachable(x)


def p_equivalent(K1: KripkeStructure, K2: KripkeStructure, props: Iterable[str]) -> bool:
    """True iff the structures share vertices and edges and agree on ``props``."""
    props = frozenset(props)
    if set(K1.vertices) != set(K2.vertices) or K1.edges != K2.edges:
        return False
    return all(K1.labels[v] & props == K2.labels[v] & props for v in K1.vertices)


# -- text format --------------------------------------------------------------


def parse_kripke(text: str) -> KripkeStructure:
    states: list[str] | None = None
    init: tuple[str, int] | None = None
    edges: list[tuple[str, str, int]] = []
    labels: dict[str, set[str]] = {}
    label_lines: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if states is None and not line.startswith("states:"):
            raise KripkeError("first directive must be 'states:'", lineno)
        if line.startswith("states:"):
            if states is not None:
                raise KripkeError("'states:' given more than once", lineno)
            states = line[len("states:"):].split()
            if not states:
                raise KripkeError("empty state list", lineno)
            seen: set[str] = set()
            for s in states:
                if not _ID.match(s):
                    raise KripkeError(f"invalid state identifier {s!r}", lineno)
                if s in seen:
                    raise KripkeError(f"duplicate state {s!r}", lineno)
                seen.add(s)
        elif line.startswith("init:"):
            parts = line[len("init:"):].split()
            if len(parts) != 1:
                raise KripkeError("'init:' takes exactly one state", lineno)
            init = (parts[0], lineno)
        elif line.startswith("edges:"):
            for tok in line[len("edges:"):].split():
                if tok.count("->") != 1:
                    raise KripkeError(f"malformed edge {tok!r}", lineno)
                a, b = tok.split("->")
                if not a or not b:
                    raise KripkeError(f"malformed edge {tok!r}", lineno)
                edges.append((a, b, lineno))
        elif line.startswith("label"):
            m = re.match(r"^label\s+([^\s:]+)\s*:(.*)$", line)
            if not m:
                raise KripkeError("malformed label directive", lineno)
            v, props = m.group(1), m.group(2).split()
            for p in props:
                if not re.match(r"^[A-Za-z0-9_]+$", p):
                    raise KripkeError(f"invalid proposition {p!r}", lineno)
            labels.setdefault(v, set()).update(props)
            label_lines.setdefault(v, lineno)
        else:
            raise KripkeError(f"unknown directive {line.split()[0]!r}", lineno)

    if states is None:
        raise KripkeError("missing 'states:' directive")
    declared = set(states)
    for a, b, lineno in edges:
        for end in (a, b):
            if end not in declared:
                raise KripkeError(f"edge {a}->{b} uses undeclared state {end!r}", lineno)
    for v, lineno in label_lines.items():
        if v not in declared:
            raise KripkeError(f"label for undeclared state {v!r}", lineno)
    if init is not None and init[0] not in declared:
        raise KripkeError(f"initial state {init[0]!r} is not declared", init[1])
    return KripkeStructure(states, [(a, b) for a, b, _ in edges], labels, init[0] if init else None)


def serialize_kripke(K: KripkeStructure, edges_per_line: int = 8) -> str:
    lines = ["states: " + " ".join(K.vertices), f"init: {K.init}"]
    ordered = [(a, b) for a in K.vertices for b in K.successors(a)]
    for i in range(0, len(ordered), edges_per_line):
        chunk = ordered[i:i + edges_per_line]
        lines.append("edges: " + " ".join(f"{a}->{b}" for a, b in chunk))
    for v in K.vertices:
        if K.labels[v]:
            lines.append(f"label {v}: " + " ".join(sorted(K.labels[v])))
    return "\n".join(lines) + "\n"
