"""Short-cycle enumeration, directed and in the underlying multigraph."""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np
from scipy import sparse

from .digraph import Digraph


def directed_cycles(D: Digraph, length: int) -> Iterator[tuple[int, ...]]:
    """Directed cycles with ``length`` distinct vertices, each listed once from its smallest vertex."""
    if length < 2:
        return
    out = D.out_adj
    for s in D.vertex_list():
        path = [s]
        on_path = {s}

        def extend(v):
            if len(path) == length:
                if s in D.out_set(v):
                    yield tuple(path)
                return
            for w in out[v]:
                if w > s and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    yield from extend(w)
                    path.pop()
                    on_path.discard(w)

        yield from extend(s)


def _adjacency(D: Digraph) -> sparse.csr_matrix:
    rows = np.repeat(np.arange(D.n), [len(r) for r in D.out_adj])
    cols = np.fromiter((v for r in D.out_adj for v in r), dtype=np.int64, count=D.m)
    return sparse.csr_matrix((np.ones(D.m), (rows, cols)), shape=(D.n, D.n))


def closed_walks(D: Digraph, length: int, block: int = 1024) -> int:
    """trace(A^length): the number of closed directed walks of that length.

    Computed in row blocks as sum(A^a[rows] * (A^T)^b[rows]) with a + b = length,
    so memory stays bounded. Zero rules out directed cycles of that length
    without enumerating paths.
    """
    if length < 2 or D.m == 0:
        return 0
    A = _adjacency(D)
    AT = A.T.tocsr()
    a = length // 2
    b = length - a
    total = 0.0
    for start in range(0, D.n, block):
        stop = min(D.n, start + block)
        R = A[start:stop]
        for _ in range(a - 1):
            R = R @ A
        S = AT[start:stop]
        for _ in range(b - 1):
            S = S @ AT
        total += R.multiply(S).sum()
    return int(round(total))


def find_directed_cycle(D: Digraph, length: int) -> tuple[int, ...] | None:
    if closed_walks(D, length) == 0:
        return None
    return next(directed_cycles(D, length), None)


def has_directed_cycle(D: Digraph) -> bool:
    indeg = {v: 0 for v in D.vertex_list()}
    for u, v in D.arc_list():
        indeg[v] += 1
    stack = [v for v, c in indeg.items() if c == 0]
    seen = 0
    while stack:
        v = stack.pop()
        seen += 1
        for w in D.out_adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    return seen != len(indeg)


def _underlying(D: Digraph) -> list[set[int]]:
    nb: list[set[int]] = [set() for _ in range(D.n)]
    for u, v in D.arc_list():
        nb[u].add(v)
        nb[v].add(u)
    return nb


def underlying_vertex_cycles(D: Digraph, length: int) -> Iterator[tuple[int, ...]]:
    """Cycles of the underlying simple graph as vertex tuples (v0 smallest, v1 < v_last).

    Length 2 yields digons (pairs joined in both directions).
    """
    if length == 2:
        for u, v in D.arc_list():
            if u < v and D.has_arc(v, u):
                yield (u, v)
        return
    if length < 3:
        return
    nb = _underlying(D)
    if length == 3:
        for u in D.vertex_list():
            for v in nb[u]:
                if v <= u:
                    continue
                for w in nb[u] & nb[v]:
                    if w > v:
                        yield (u, v, w)
        return
    for s in D.vertex_list():
        path = [s]
        on_path = {s}

        def extend(v):
            if len(path) == length:
                if s in nb[v] and path[1] < path[-1]:
                    yield tuple(path)
                return
            for w in nb[v]:
                if w > s and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    yield from extend(w)
                    path.pop()
                    on_path.discard(w)

        yield from extend(s)


def underlying_arc_cycles(D: Digraph, length: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Cycles of the underlying multigraph as tuples of arcs.

    Where two vertices are joined in both directions, each choice of arc gives a
    separate cycle.
    """
    if length == 2:
        for u, v in underlying_vertex_cycles(D, 2):
            yield ((u, v), (v, u))
        return
    arcs = set(D.arc_list())
    for cyc in underlying_vertex_cycles(D, length):
        options = []
        single = True
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            fwd, back = (a, b) in arcs, (b, a) in arcs
            if fwd and back:
                single = False
                options.append(((a, b), (b, a)))
            else:
                options.append(((a, b),) if fwd else ((b, a),))
        if single:
            yield tuple(o[0] for o in options)
        else:
            yield from itertools.product(*options)


def has_underlying_cycle(D: Digraph, length: int) -> bool:
    return next(underlying_vertex_cycles(D, length), None) is not None
