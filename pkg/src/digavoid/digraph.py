"""Simple digraphs, multidigraphs and the degree/walk/peeling machinery on them.

Vertices are integers in ``range(n)``. A digraph may carry an explicit vertex
set (a subset of ``range(n)``) so that sub-digraphs keep their original ids;
when the set is omitted every id in ``range(n)`` is a vertex.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidArc, InvalidVertex
from .rng import arc_uniforms

Arc = tuple[int, int]


class Digraph:
    """Immutable simple loop-free digraph.

    ``out_adj[v]`` and ``in_adj[v]`` are sorted tuples. Use :func:`build_digraph`
    for validated construction from an arc sequence.
    """

    __slots__ = ("n", "out_adj", "in_adj", "_vertices", "_arcs", "_out_sets", "_in_sets", "_m")

    def __init__(self, n: int, out_adj: Sequence[Sequence[int]], vertices: Iterable[int] | None = None):
        # Trusted constructor: out_adj rows must be duplicate-free, loop-free, in range.
        self.n = n
        self.out_adj = tuple(tuple(sorted(row)) for row in out_adj)
        ins: list[list[int]] = [[] for _ in range(n)]
        for u, row in enumerate(self.out_adj):
            for v in row:
                ins[v].append(u)
        self.in_adj = tuple(tuple(row) for row in ins)
        self._vertices = None if vertices is None else frozenset(vertices)
        if self._vertices is not None and len(self._vertices) == n:
            self._vertices = None
        self._arcs = None
        self._out_sets = None
        self._in_sets = None
        self._m = sum(len(r) for r in self.out_adj)

    # -- basic accessors -------------------------------------------------
    @property
    def vertices(self) -> frozenset[int]:
        if self._vertices is None:
            return frozenset(range(self.n))
        return self._vertices

    def vertex_list(self) -> list[int]:
        if self._vertices is None:
            return list(range(self.n))
        return sorted(self._vertices)

    def has_vertex(self, v: int) -> bool:
        return 0 <= v < self.n and (self._vertices is None or v in self._vertices)

    @property
    def order(self) -> int:
        return self.n if self._vertices is None else len(self._vertices)

    @property
    def m(self) -> int:
        return self._m

    @property
    def arcs(self) -> frozenset[Arc]:
        if self._arcs is None:
            self._arcs = frozenset((u, v) for u, row in enumerate(self.out_adj) for v in row)
        return self._arcs

    def arc_list(self) -> list[Arc]:
        return [(u, v) for u, row in enumerate(self.out_adj) for v in row]

    def out_set(self, v: int) -> frozenset[int]:
        if self._out_sets is None:
            self._out_sets = [None] * self.n
        s = self._out_sets[v]
        if s is None:
            s = self._out_sets[v] = frozenset(self.out_adj[v])
        return s

    def in_set(self, v: int) -> frozenset[int]:
        if self._in_sets is None:
            self._in_sets = [None] * self.n
        s = self._in_sets[v]
        if s is None:
            s = self._in_sets[v] = frozenset(self.in_adj[v])
        return s

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.out_set(u)

    def out_degree(self, v: int) -> int:
        return len(self.out_adj[v])

    def in_degree(self, v: int) -> int:
        return len(self.in_adj[v])

    # -- derived digraphs ------------------------------------------------
    def with_out_adj(self, out_adj: Sequence[Sequence[int]]) -> "Digraph":
        """Spanning digraph on the same vertex set with the given out-lists."""
        return Digraph(self.n, out_adj, self._vertices)

    def spanning(self, arcs: Iterable[Arc]) -> "Digraph":
        rows: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in arcs:
            rows[u].append(v)
        return Digraph(self.n, rows, self._vertices)

    def induced(self, vertices: Iterable[int]) -> "Digraph":
        keep = frozenset(vertices)
        rows = [
            [v for v in self.out_adj[u] if v in keep] if u in keep else []
            for u in range(self.n)
        ]
        return Digraph(self.n, rows, keep)

    def reverse(self) -> "Digraph":
        return Digraph(self.n, self.in_adj, self._vertices)

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and self.vertices == other.vertices and self.out_adj == other.out_adj

    def __hash__(self):
        return hash((self.n, self.out_adj))

    def __repr__(self):
        return f"Digraph(n={self.n}, order={self.order}, m={self.m})"


def build_digraph(n: int, arcs: Iterable[Arc], vertices: Iterable[int] | None = None) -> Digraph:
    """Validated construction; duplicate arcs collapse to one."""
    if n < 0:
        raise InvalidVertex(f"vertex count must be non-negative, got {n}")
    vset = None if vertices is None else frozenset(vertices)
    if vset is not None:
        for v in vset:
            if not (0 <= v < n):
                raise InvalidVertex(f"vertex {v} outside [0, {n})")
    rows: list[set[int]] = [set() for _ in range(n)]
    for arc in arcs:
        u, v = int(arc[0]), int(arc[1])
        if not (0 <= u < n) or not (0 <= v < n):
            raise InvalidVertex(f"arc ({u}, {v}) has an endpoint outside [0, {n})")
        if u == v:
            raise InvalidArc(f"self-loop at vertex {u}")
        if vset is not None and (u not in vset or v not in vset):
            raise InvalidVertex(f"arc ({u}, {v}) leaves the vertex set")
        rows[u].add(v)
    return Digraph(n, rows, vset)


class MultiDigraph:
    """Loop-free directed multigraph; every arc carries a tag (the witness vertex)."""

    __slots__ = ("n", "arcs", "_vertices")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int, object]] = (), vertices: Iterable[int] | None = None):
        self.n = n
        self.arcs = tuple((int(u), int(v), t) for u, v, t in arcs)
        for u, v, _ in self.arcs:
            if u == v:
                raise InvalidArc(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidVertex(f"arc ({u}, {v}) outside [0, {n})")
        self._vertices = None if vertices is None else frozenset(vertices)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(range(self.n)) if self._vertices is None else self._vertices

    def vertex_list(self) -> list[int]:
        return sorted(self.vertices)

    def multiplicity(self, u: int, v: int) -> int:
        return sum(1 for a, b, _ in self.arcs if a == u and b == v)

    def multiplicities(self) -> Counter:
        return Counter((u, v) for u, v, _ in self.arcs)

    def out_multidegree(self) -> Counter:
        return Counter(u for u, _, _ in self.arcs)

    def max_out_multidegree(self) -> int:
        c = self.out_multidegree()
        return max(c.values(), default=0)

    def __len__(self):
        return len(self.arcs)

    def __repr__(self):
        return f"MultiDigraph(n={self.n}, arcs={len(self.arcs)})"


@dataclass(frozen=True)
class DegreeStats:
    min_out: int
    min_in: int
    max_out: int
    max_in: int


def degree_stats(D: Digraph) -> DegreeStats:
    vs = D.vertex_list()
    if not vs:
        return DegreeStats(0, 0, 0, 0)
    outs = [len(D.out_adj[v]) for v in vs]
    ins = [len(D.in_adj[v]) for v in vs]
    return DegreeStats(min(outs), min(ins), max(outs), max(ins))


def min_out_degree(D: Digraph) -> int:
    return min((len(D.out_adj[v]) for v in D.vertex_list()), default=0)


def reachable_set(D: Digraph, S: Iterable[int], i: int, direction: str = "forward") -> set[int]:
    """Ends of directed walks of length exactly ``i`` starting (forward) or ending (backward) in S."""
    if i < 0:
        raise ValueError("walk length must be non-negative")
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    adj = D.out_adj if direction == "forward" else D.in_adj
    frontier = set(S)
    for _ in range(i):
        nxt: set[int] = set()
        for v in frontier:
            nxt.update(adj[v])
        frontier = nxt
        if not frontier:
            break
    return frontier


def out_core(D: Digraph, k: int) -> Digraph:
    """Maximal induced sub-digraph with every out-degree >= k (iterated peeling)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    alive = [False] * D.n
    for v in D.vertex_list():
        alive[v] = True
    deg = [len(D.out_adj[v]) if alive[v] else 0 for v in range(D.n)]
    stack = [v for v in range(D.n) if alive[v] and deg[v] < k]
    for v in stack:
        alive[v] = False
    while stack:
        v = stack.pop()
        for u in D.in_adj[v]:
            if alive[u]:
                deg[u] -= 1
                if deg[u] < k:
                    alive[u] = False
                    stack.append(u)
    return D.induced(v for v in range(D.n) if alive[v])


def _peel(M: MultiDigraph) -> tuple[list[int], int]:
    verts = M.vertex_list()
    nbr: dict[int, Counter] = {v: Counter() for v in verts}
    for u, v, _ in M.arcs:
        nbr[u][v] += 1
        nbr[v][u] += 1
    deg = {v: sum(c.values()) for v, c in nbr.items()}
    heap = [(d, v) for v, d in deg.items()]
    heapq.heapify(heap)
    removed: set[int] = set()
    peel_order: list[int] = []
    bound = 0
    while heap:
        d, v = heapq.heappop(heap)
        if v in removed or d != deg[v]:
            continue
        removed.add(v)
        peel_order.append(v)
        bound = max(bound, d)
        for u, mult in nbr[v].items():
            if u not in removed:
                deg[u] -= mult
                heapq.heappush(heap, (deg[u], u))
    peel_order.reverse()
    return peel_order, bound


def degeneracy_ordering(M: MultiDigraph) -> list[int]:
    """Order v_1..v_n where each v_i has at most degeneracy-many arc endpoints among earlier vertices.

    Multiplicities count; arcs count in both directions. Built by repeatedly
    removing a minimum-degree vertex (smallest id on ties) and reversing.
    """
    return _peel(M)[0]


def degeneracy(M: MultiDigraph) -> int:
    return _peel(M)[1]


def back_degrees(M: MultiDigraph, ordering: Sequence[int], direction: str = "both") -> dict[int, int]:
    """For each vertex, the number of arc endpoints it has among earlier vertices of ``ordering``.

    ``direction='in'`` counts only arcs (earlier -> v).
    """
    pos = {v: i for i, v in enumerate(ordering)}
    out = {v: 0 for v in ordering}
    for u, v, _ in M.arcs:
        if direction in ("both", "in") and pos[u] < pos[v]:
            out[v] += 1
        if direction == "both" and pos[v] < pos[u]:
            out[u] += 1
    return out


def subsample_arcs(
    D: Digraph,
    keep: Callable[[int, int], bool] | None,
    p: float,
    seed: int,
    label: str = "subsample",
) -> Digraph:
    """Keep each arc satisfying ``keep`` independently with probability p; others always kept.

    The coin for arc (u, v) depends only on ``(seed, label, u * n + v)``.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p}")
    arcs = D.arc_list()
    if not arcs:
        return D
    a = np.asarray(arcs, dtype=np.int64)
    keys = a[:, 0] * D.n + a[:, 1]
    coin = arc_uniforms(seed, keys, label) < p
    if keep is not None:
        mask = np.fromiter((bool(keep(u, v)) for u, v in arcs), dtype=bool, count=len(arcs))
        coin |= ~mask
    rows: list[list[int]] = [[] for _ in range(D.n)]
    for (u, v), c in zip(arcs, coin.tolist()):
        if c:
            rows[u].append(v)
    return D.with_out_adj(rows)


def undirected_neighbors(D: Digraph, v: int) -> set[int]:
    return set(D.out_adj[v]) | set(D.in_adj[v])


def is_regular(D: Digraph) -> int | None:
    """Common in/out degree if D is regular in both directions, else None."""
    vs = D.vertex_list()
    if not vs:
        return 0
    d = len(D.out_adj[vs[0]])
    for v in vs:
        if len(D.out_adj[v]) != d or len(D.in_adj[v]) != d:
            return None
    return d
