"""Exclusivity graphs, the graph families used for certification, and graph I/O.

Vertices are 1-based (events ``1..n``); index 0 is reserved for the state row
of the SDP matrices built on top of a graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from contextacert import kernels
from contextacert.errors import (
    LengthMismatch,
    OutOfRangeVertex,
    ParseError,
    SelfLoop,
    TooLarge,
    TooSmall,
)

DEFAULT_ALPHA_LIMIT = 40


@dataclass(frozen=True)
class ExclusivityGraph:
    """Undirected simple graph on events ``1..n``.

    Build instances with :func:`from_edge_list` (or the family constructors)
    so that the edge tuple is normalized: each pair stored as ``(i, j)`` with
    ``i < j``, sorted, without duplicates.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise TooSmall(f"graph needs at least one vertex, got n={self.n}")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise SelfLoop(f"self-loop at vertex {i}")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise OutOfRangeVertex(f"edge ({i}, {j}) outside 1..{self.n}")
            if i > j or (i, j) in seen:
                raise ValueError("edges must be normalized; use from_edge_list")
            seen.add((i, j))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._edge_set

    @property
    def _edge_set(self) -> frozenset:
        cached = self.__dict__.get("_edges_cache")
        if cached is None:
            cached = frozenset(self.edges)
            object.__setattr__(self, "_edges_cache", cached)
        return cached

    def non_edges(self) -> list[tuple[int, int]]:
        """Vertex pairs ``i < j`` that are not adjacent."""
        es = self._edge_set
        return [p for p in combinations(range(1, self.n + 1), 2) if p not in es]

    def adjacency(self) -> np.ndarray:
        """0/1 adjacency matrix indexed by ``vertex - 1``."""
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for i, j in self.edges:
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1
        return a

    def degrees(self) -> tuple[int, ...]:
        deg = [0] * self.n
        for i, j in self.edges:
            deg[i - 1] += 1
            deg[j - 1] += 1
        return tuple(deg)

    def neighbor_masks(self) -> list[int]:
        """Bitmask of neighbours per vertex, bit ``v-1`` for vertex ``v``."""
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i - 1] |= 1 << (j - 1)
            masks[j - 1] |= 1 << (i - 1)
        return masks

    def without_edge(self, i: int, j: int) -> "ExclusivityGraph":
        drop = (min(i, j), max(i, j))
        return ExclusivityGraph(self.n, tuple(e for e in self.edges if e != drop))

    def label(self) -> str:
        return self.name or f"graph(n={self.n}, m={self.num_edges})"

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class WeightVector:
    """Non-negative inequality weights; all-ones is the canonical inequality."""

    w: tuple[float, ...]

    def __post_init__(self):
        if any(not np.isfinite(x) or x < 0 for x in self.w):
            raise ValueError("weights must be finite and non-negative")

    @classmethod
    def canonical(cls, n: int) -> "WeightVector":
        return cls((1.0,) * n)

    def __len__(self):
        return len(self.w)

    def as_array(self, n: int | None = None) -> np.ndarray:
        if n is not None and len(self.w) != n:
            raise LengthMismatch(f"expected {n} weights, got {len(self.w)}")
        return np.asarray(self.w, dtype=float)


def from_edge_list(n: int, edges: Iterable[Sequence[int]], name: str = "") -> ExclusivityGraph:
    """Build a normalized graph from 1-based vertex pairs."""
    if n < 1:
        raise TooSmall(f"graph needs at least one vertex, got n={n}")
    norm = set()
    for pair in edges:
        if len(pair) != 2:
            raise ValueError(f"edge {pair!r} is not a pair")
        i, j = int(pair[0]), int(pair[1])
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}")
        for v in (i, j):
            if not 1 <= v <= n:
                raise OutOfRangeVertex(f"vertex {v} outside 1..{n}")
        norm.add((min(i, j), max(i, j)))
    return ExclusivityGraph(n, tuple(sorted(norm)), name)


def cycle(n: int) -> ExclusivityGraph:
    """The ``n``-cycle with edges ``{i, i+1 mod n}``."""
    if n < 3:
        raise TooSmall(f"cycle needs n >= 3, got {n}")
    return from_edge_list(n, [(i, i % n + 1) for i in range(1, n + 1)], name=f"C{n}")


def complement(g: ExclusivityGraph) -> ExclusivityGraph:
    name = ""
    if g.name:
        name = g.name[1:] if g.name.startswith("~") else "~" + g.name
    return ExclusivityGraph(g.n, tuple(g.non_edges()), name)


def anticycle(n: int) -> ExclusivityGraph:
    """Complement of the ``n``-cycle (an anti-hole for odd ``n``)."""
    if n < 5:
        raise TooSmall(f"anticycle needs n >= 5, got {n}")
    g = complement(cycle(n))
    return ExclusivityGraph(g.n, g.edges, name=f"~C{n}")


def complete(n: int) -> ExclusivityGraph:
    return from_edge_list(n, combinations(range(1, n + 1), 2), name=f"K{n}")


def empty(n: int) -> ExclusivityGraph:
    return ExclusivityGraph(n, (), name=f"E{n}")


def counterexample6() -> ExclusivityGraph:
    """Six-event graph whose canonical inequality has a quantum gap but no self-test."""
    return from_edge_list(
        6,
        [(1, 3), (1, 4), (1, 6), (2, 4), (2, 5), (2, 6), (3, 5), (4, 6)],
        name="NST6",
    )


def maximum_independent_set(g: ExclusivityGraph, limit: int = DEFAULT_ALPHA_LIMIT) -> tuple[int, ...]:
    """One maximum independent set (1-based vertices), found exactly."""
    if g.n > limit:
        raise TooLarge(f"exact independence search refused for n={g.n} > limit {limit}")
    size, mask = kernels.max_independent_set(g.neighbor_masks(), g.n)
    chosen = tuple(v + 1 for v in range(g.n) if mask >> v & 1)
    assert len(chosen) == size
    return chosen


def independence_number(g: ExclusivityGraph, limit: int = DEFAULT_ALPHA_LIMIT) -> int:
    """Exact independence number, equal to the NCHV bound of the canonical inequality."""
    return len(maximum_independent_set(g, limit))


def is_independent_set(g: ExclusivityGraph, vertices: Iterable[int]) -> bool:
    vs = sorted(set(vertices))
    return all(not g.has_edge(i, j) for i, j in combinations(vs, 2))


def nchv_bound(g: ExclusivityGraph, weights: WeightVector | None = None, limit: int = DEFAULT_ALPHA_LIMIT) -> float:
    """Maximum of ``sum w_i p_i`` over deterministic non-contextual behaviours.

    Canonical weights reduce to :func:`independence_number`; general weights
    use a weighted branch and bound in pure Python.
    """
    if weights is None:
        return float(independence_number(g, limit))
    w = weights.as_array(g.n)
    if g.n > limit:
        raise TooLarge(f"exact independence search refused for n={g.n} > limit {limit}")
    adj = g.neighbor_masks()
    best = [0.0]

    def bound(mask):
        # clique cover: each clique contributes at most its heaviest vertex
        total = 0.0
        rest = mask
        while rest:
            cand = rest
            heaviest = 0.0
            while cand:
                v = (cand & -cand).bit_length() - 1
                heaviest = max(heaviest, w[v])
                cand &= adj[v]
                rest &= ~(1 << v)
            total += heaviest
        return total

    def expand(mask, value):
        if mask == 0:
            best[0] = max(best[0], value)
            return
        if value + bound(mask) <= best[0] + 1e-12:
            return
        v = (mask & -mask).bit_length() - 1
        bit = 1 << v
        expand(mask & ~adj[v] & ~bit, value + w[v])
        expand(mask & ~bit, value)

    expand((1 << g.n) - 1, 0.0)
    return best[0]


# -- I/O ------------------------------------------------------------------------

def parse_graph(text: str, fmt: str = "edgelist") -> ExclusivityGraph:
    """Parse edge-list text or JSON into a graph.

    Edge-list: first non-comment line is ``n``; then one ``i j`` pair per line;
    blank lines and lines starting with ``#`` are ignored. JSON: an object with
    integer ``n`` and ``edges`` as a list of 2-element integer lists.
    """
    if fmt == "json":
        return _parse_json(text)
    if fmt != "edgelist":
        raise ValueError(f"unknown graph format {fmt!r}")
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise ParseError(f"expected integers, got {line!r}", line=lineno) from None
        if n is None:
            if len(values) != 1 or values[0] < 1:
                raise ParseError("first line must be a positive vertex count", line=lineno)
            n = values[0]
            continue
        if len(values) != 2:
            raise ParseError(f"expected 'i j', got {line!r}", line=lineno)
        i, j = values
        if i == j:
            raise ParseError(f"self-loop at vertex {i}", line=lineno, cause=SelfLoop)
        for v in (i, j):
            if not 1 <= v <= n:
                raise ParseError(f"vertex {v} outside 1..{n}", line=lineno, cause=OutOfRangeVertex)
        edges.append((i, j))
    if n is None:
        raise ParseError("empty graph description")
    return from_edge_list(n, edges)


def _parse_json(text: str) -> ExclusivityGraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise ParseError("JSON graph must be an object with 'n' and 'edges'")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("'n' must be a positive integer")
    edges = obj["edges"]
    if not isinstance(edges, list):
        raise ParseError("'edges' must be a list")
    for k, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in e)):
            raise ParseError(f"edge #{k} must be a 2-element integer list")
        i, j = e
        if i == j:
            raise ParseError(f"edge #{k}: self-loop at vertex {i}", cause=SelfLoop)
        for v in (i, j):
            if not 1 <= v <= n:
                raise ParseError(f"edge #{k}: vertex {v} outside 1..{n}", cause=OutOfRangeVertex)
    return from_edge_list(n, edges, name=str(obj.get("name", "")))


def serialize_graph(g: ExclusivityGraph, fmt: str = "edgelist") -> str:
    if fmt == "json":
        return json.dumps(g.to_dict())
    if fmt != "edgelist":
        raise ValueError(f"unknown graph format {fmt!r}")
    lines = [str(g.n)] + [f"{i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


def load_graph(path) -> ExclusivityGraph:
    """Read a graph file; ``.json`` selects JSON, anything else edge-list text."""
    from pathlib import Path

    p = Path(path)
    fmt = "json" if p.suffix.lower() == ".json" else "edgelist"
    g = parse_graph(p.read_text(encoding="utf-8"), fmt)
    return g if g.name else ExclusivityGraph(g.n, g.edges, p.stem)
