"""Forbidden-digraph catalog, containment search, height functions and grounded forests."""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .digraph import Digraph, build_digraph
from .errors import NotAForest, UnknownPattern


@dataclass(frozen=True)
class Pattern:
    graph: Digraph
    name: str = "custom"

    @property
    def size(self) -> int:
        return self.graph.order


_CYCLE_ARCS = {
    "C3_1": (3, [(0, 1), (1, 2), (2, 0)]),
    "C3_2": (3, [(0, 1), (1, 2), (0, 2)]),
    "C5_1": (5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]),
    "C5_2": (5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]),
    "C5_3": (5, [(0, 1), (1, 2), (2, 3), (4, 3), (0, 4)]),
    "C5_4": (5, [(0, 1), (1, 2), (3, 2), (3, 4), (0, 4)]),
}

CYCLE_NAMES = tuple(_CYCLE_ARCS)


def cycle_orientation(name: str) -> Pattern:
    """The directed/transitive triangle or one of the four orientations of the 5-cycle.

    ``C5_2`` has source 0, the 4-arc path 0->1->2->3->4 and the arc 0->4.
    """
    try:
        n, arcs = _CYCLE_ARCS[name]
    except KeyError:
        raise UnknownPattern(f"unknown cycle orientation {name!r}; expected one of {', '.join(CYCLE_NAMES)}") from None
    return Pattern(build_digraph(n, arcs), name)


def one_directed_bipartite(a: int, b: int) -> Pattern:
    if a < 1 or b < 1:
        raise ValueError("both sides need at least one vertex")
    arcs = [(i, a + j) for i in range(a) for j in range(b)]
    return Pattern(build_digraph(a + b, arcs), f"K_onedir_{a}_{b}")


def directed_path(vertices: int) -> Pattern:
    arcs = [(i, i + 1) for i in range(vertices - 1)]
    return Pattern(build_digraph(vertices, arcs), f"dipath_{vertices}")


def single_arc() -> Pattern:
    return Pattern(build_digraph(2, [(0, 1)]), "arc")


def pattern_from_name(name: str) -> Pattern:
    """Resolve a catalog name: cycle orientations, ``K_onedir_a_b``, ``arc``, ``dipath_n``."""
    if name in _CYCLE_ARCS:
        return cycle_orientation(name)
    if name == "arc":
        return single_arc()
    m = re.fullmatch(r"K_onedir_(\d+)_(\d+)", name)
    if m:
        return one_directed_bipartite(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"dipath_(\d+)", name)
    if m and int(m.group(1)) >= 1:
        return directed_path(int(m.group(1)))
    raise UnknownPattern(f"unknown pattern {name!r}")


# ---------------------------------------------------------------------------
# containment


def _match_order(F: Digraph) -> list[int]:
    verts = F.vertex_list()
    deg = {v: F.out_degree(v) + F.in_degree(v) for v in verts}
    nbrs = {v: set(F.out_adj[v]) | set(F.in_adj[v]) for v in verts}
    order: list[int] = []
    placed: set[int] = set()
    while len(order) < len(verts):
        best = max(
            (v for v in verts if v not in placed),
            key=lambda v: (len(nbrs[v] & placed), deg[v], -v),
        )
        order.append(best)
        placed.add(best)
    return order


def iter_embeddings(
    D: Digraph, F: Pattern | Digraph, anchors: Mapping[int, frozenset[int] | set[int]] | None = None
) -> Iterator[dict[int, int]]:
    """Injective maps phi with (phi(x), phi(y)) an arc of D for every arc (x, y) of F.

    ``anchors`` optionally confines pattern vertex x to the given host vertices.
    """
    Fg = F.graph if isinstance(F, Pattern) else F
    order = _match_order(Fg)
    if not order:
        yield {}
        return
    pos = {x: i for i, x in enumerate(order)}
    constraints = []
    for x in order:
        cons = []
        for y in Fg.in_adj[x]:
            if pos[y] < pos[x]:
                cons.append((pos[y], True))  # candidate in out-set of phi(y)
        for y in Fg.out_adj[x]:
            if pos[y] < pos[x]:
                cons.append((pos[y], False))  # candidate in in-set of phi(y)
        constraints.append(cons)
    need_out = [Fg.out_degree(x) for x in order]
    need_in = [Fg.in_degree(x) for x in order]
    allowed = [None if anchors is None else anchors.get(x) for x in order]
    host_vertices = D.vertex_list()
    image = [0] * len(order)
    used: set[int] = set()
    depth_count = len(order)

    out_sets = [D.out_set(v) if D.has_vertex(v) else frozenset() for v in range(D.n)]
    in_sets = [D.in_set(v) if D.has_vertex(v) else frozenset() for v in range(D.n)]
    out_deg = [len(r) for r in D.out_adj]
    in_deg = [len(r) for r in D.in_adj]

    def raw_candidates(j):
        cons = constraints[j]
        if cons:
            sets = [out_sets[image[i]] if outward else in_sets[image[i]] for i, outward in cons]
            sets.sort(key=len)
            cand = sets[0]
            for s in sets[1:]:
                cand = cand & s
                if not cand:
                    return cand
            if allowed[j] is not None:
                cand = cand & allowed[j]
            return cand
        if allowed[j] is not None:
            return [v for v in allowed[j] if D.has_vertex(v)]
        return host_vertices

    last = depth_count - 1

    def rec(j):
        no, ni = need_out[j], need_in[j]
        cand = raw_candidates(j)
        if j == last:
            for v in sorted(cand) if len(cand) > 1 else cand:
                if v not in used and out_deg[v] >= no and in_deg[v] >= ni:
                    image[j] = v
                    yield {order[i]: image[i] for i in range(depth_count)}
            return
        for v in sorted(cand):
            if v in used or out_deg[v] < no or in_deg[v] < ni:
                continue
            image[j] = v
            used.add(v)
            yield from rec(j + 1)
            used.discard(v)

    yield from rec(0)


def find_pattern(
    D: Digraph, F: Pattern | Digraph, anchors: Mapping[int, frozenset[int] | set[int]] | None = None
) -> dict[int, int] | None:
    """One embedding of F into D, or None when D is F-free."""
    return next(iter_embeddings(D, F, anchors), None)


def is_embedding(D: Digraph, F: Pattern | Digraph, phi: Mapping[int, int]) -> bool:
    Fg = F.graph if isinstance(F, Pattern) else F
    if set(phi) != set(Fg.vertex_list()) or len(set(phi.values())) != len(phi):
        return False
    return all(D.has_arc(phi[x], phi[y]) for x, y in Fg.arc_list())


# ---------------------------------------------------------------------------
# underlying-graph structure


def weak_components(D: Digraph) -> list[list[int]]:
    seen: set[int] = set()
    comps = []
    for s in D.vertex_list():
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u in itertools.chain(D.out_adj[v], D.in_adj[v]):
                if u not in seen:
                    seen.add(u)
                    comp.append(u)
                    queue.append(u)
        comps.append(sorted(comp))
    return comps


def is_weakly_connected(D: Digraph) -> bool:
    return len(weak_components(D)) <= 1


def is_oriented_forest(D: Digraph) -> bool:
    """Underlying multigraph (digons count as 2-cycles) is acyclic."""
    return D.m == D.order - len(weak_components(D)) and not any(
        D.has_arc(v, u) for u, v in D.arc_list()
    )


def shortest_underlying_cycle(D: Digraph) -> int | None:
    """Length of a shortest cycle in the underlying multigraph (a digon has length 2)."""
    if any(D.has_arc(v, u) for u, v in D.arc_list()):
        return 2
    best = None
    nbrs = {v: set(D.out_adj[v]) | set(D.in_adj[v]) for v in D.vertex_list()}
    for s in D.vertex_list():
        dist = {s: 0}
        parent = {s: None}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u in nbrs[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    parent[u] = v
                    queue.append(u)
                elif parent[v] != u:
                    length = dist[u] + dist[v] + 1
                    if best is None or length < best:
                        best = length
    return best


# ---------------------------------------------------------------------------
# height functions


@dataclass(frozen=True)
class HeightFunction:
    heights: dict[int, int]

    def verify(self, F: Digraph) -> bool:
        h = self.heights
        return all(h[v] == h[u] + 1 for u, v in F.arc_list())


def compute_height_function(F: Digraph) -> HeightFunction | None:
    """A height function with minimum 0 on every weak component, or None if none exists."""
    h: dict[int, int] = {}
    for comp in weak_components(F):
        root = comp[0]
        h[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u in F.out_adj[v]:
                if u not in h:
                    h[u] = h[v] + 1
                    queue.append(u)
                elif h[u] != h[v] + 1:
                    return None
            for u in F.in_adj[v]:
                if u not in h:
                    h[u] = h[v] - 1
                    queue.append(u)
                elif h[u] != h[v] - 1:
                    return None
        low = min(h[v] for v in comp)
        for v in comp:
            h[v] -= low
    return HeightFunction(h)


@dataclass(frozen=True)
class GroundedCertificate:
    """``grounded``: ``heights`` is constant on in-degree >= 2 vertices.
    ``not_grounded``: ``pair`` are two such vertices joined by an unbalanced path."""

    verdict: str
    heights: dict[int, int] | None = None
    pair: tuple[int, int] | None = None
    path: tuple[int, ...] | None = None
    imbalance: int | None = None

    @property
    def grounded(self) -> bool:
        return self.verdict == "grounded"

    def verify(self, F: Digraph) -> bool:
        heavy = [v for v in F.vertex_list() if F.in_degree(v) >= 2]
        if self.verdict == "grounded":
            h = self.heights or {}
            if set(h) != set(F.vertex_list()) or not HeightFunction(h).verify(F):
                return False
            return len({h[v] for v in heavy}) <= 1
        if self.verdict != "not_grounded" or self.pair is None or self.path is None:
            return False
        u, v = self.pair
        if u not in heavy or v not in heavy or self.path[0] != u or self.path[-1] != v:
            return False
        if len(set(self.path)) != len(self.path):
            return False
        balance = 0
        for a, b in zip(self.path, self.path[1:]):
            if F.has_arc(a, b):
                balance += 1
            elif F.has_arc(b, a):
                balance -= 1
            else:
                return False
        return balance != 0 and balance == self.imbalance


def _tree_path(F: Digraph, u: int, v: int) -> tuple[int, ...]:
    parent = {u: None}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if x == v:
            break
        for y in itertools.chain(F.out_adj[x], F.in_adj[x]):
            if y not in parent:
                parent[y] = x
                queue.append(y)
    path = [v]
    while path[-1] != u:
        path.append(parent[path[-1]])
    return tuple(reversed(path))


def is_grounded_forest(F: Digraph) -> GroundedCertificate:
    if not is_oriented_forest(F):
        raise NotAForest("the underlying graph contains a cycle")
    base = compute_height_function(F)
    assert base is not None  # forests always admit one
    h = dict(base.heights)
    for comp in weak_components(F):
        heavy = [v for v in comp if F.in_degree(v) >= 2]
        if not heavy:
            continue
        levels = {h[v] for v in heavy}
        if len(levels) > 1:
            u = heavy[0]
            w = next(x for x in heavy if h[x] != h[u])
            path = _tree_path(F, u, w)
            return GroundedCertificate("not_grounded", pair=(u, w), path=path, imbalance=h[w] - h[u])
        shift = h[heavy[0]]
        for v in comp:
            h[v] -= shift
    return GroundedCertificate("grounded", heights=h)


# ---------------------------------------------------------------------------
# orientation enumeration and canonical forms


def canonical_form(D: Digraph) -> tuple:
    """Minimum relabelled arc encoding over all degree-class-preserving vertex permutations."""
    verts = D.vertex_list()
    key = {v: (D.out_degree(v), D.in_degree(v)) for v in verts}
    classes: dict[tuple, list[int]] = {}
    for v in verts:
        classes.setdefault(key[v], []).append(v)
    class_keys = sorted(classes)
    arcs = D.arc_list()
    best = None
    for perms in itertools.product(*(itertools.permutations(classes[c]) for c in class_keys)):
        label = {}
        i = 0
        for group in perms:
            for v in group:
                label[v] = i
                i += 1
        enc = tuple(sorted((label[u], label[v]) for u, v in arcs))
        if best is None or enc < best:
            best = enc
    return (len(verts), tuple(key[v] for c in class_keys for v in classes[c]), best or ())


def _cycle_from_directions(bits: tuple[int, ...]) -> Digraph:
    n = len(bits)
    arcs = [((i, (i + 1) % n) if b == 0 else ((i + 1) % n, i)) for i, b in enumerate(bits)]
    return build_digraph(n, arcs)


def enumerate_orientations(length: int) -> list[Pattern]:
    """All orientations of the cycle of the given length, one per isomorphism class."""
    if not (3 <= length <= 8):
        raise ValueError("cycle length must lie in [3, 8]")
    seen: set[tuple] = set()
    out: list[Pattern] = []
    for bits in itertools.product((0, 1), repeat=length):
        D = _cycle_from_directions(bits)
        cf = canonical_form(D)
        if cf in seen:
            continue
        seen.add(cf)
        out.append(Pattern(D, f"C{length}_o{len(out) + 1}"))
    return out


STANDARD_SIX = ("C3_1", "C3_2", "C5_1", "C5_2", "C5_3", "C5_4")
