"""Gadget digraphs certifying non-avoidability, plus random regular generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import linear_sum_assignment

from .digraph import Digraph, is_regular
from .errors import NotATree, ParameterInfeasible, RetryBudgetExceeded, TooLarge
from .patterns import Pattern, is_oriented_forest, is_weakly_connected
from .rng import stream

DEFAULT_VERTEX_CAP = 10**6
REPAIR_ATTEMPTS = 3  # local repairs before falling back to an assignment solve


@dataclass(frozen=True)
class LayeredRooted:
    graph: Digraph
    root: int
    layers: tuple[frozenset[int], ...]
    bottom: frozenset[int]
    faithful: bool = True

    @property
    def height(self) -> int:
        return len(self.layers) - 1

    def layer_sizes(self) -> list[int]:
        return [len(layer) for layer in self.layers]


@dataclass(frozen=True)
class Gadget:
    """A constructed digraph plus the metadata written to the JSON sidecar."""

    construction: str
    graph: Digraph
    parameters: dict
    layer_sizes: list[int]
    roots: tuple[int, ...] = ()
    faithful: bool = True
    extra: dict = field(default_factory=dict)

    def sidecar(self) -> dict:
        return {
            "construction": self.construction,
            "parameters": self.parameters,
            "n": self.graph.n,
            "m": self.graph.m,
            "layer_sizes": self.layer_sizes,
            "faithful": self.faithful,
            **self.extra,
        }


def ceil_log(base: int, value: int) -> int:
    """Smallest l >= 0 with base**l >= value (exact integer arithmetic)."""
    if base < 2:
        raise ParameterInfeasible(f"logarithm base must be at least 2, got {base}")
    level, power = 0, 1
    while power < value:
        power *= base
        level += 1
    return level


def arborescence_size(d: int, height: int) -> int:
    if d == 1:
        return height + 1
    return (d ** (height + 1) - 1) // (d - 1)


def _check_cap(required: int, cap: int, what: str) -> None:
    if required > cap:
        raise TooLarge(f"{what} needs {required} vertices, above the cap of {cap}", required=required, cap=cap)


def out_arborescence(d: int, height: int, cap: int = DEFAULT_VERTEX_CAP) -> LayeredRooted:
    """Complete d-ary out-tree; vertex v has children d*v+1 .. d*v+d."""
    if d < 1 or height < 0:
        raise ParameterInfeasible("need d >= 1 and height >= 0")
    size = arborescence_size(d, height)
    _check_cap(size, cap, f"out-arborescence({d}, {height})")
    leaves_start = size - d**height
    rows = [list(range(d * v + 1, d * v + d + 1)) if v < leaves_start else [] for v in range(size)]
    layers = []
    start = 0
    for depth in range(height + 1):
        width = d**depth
        layers.append(frozenset(range(start, start + width)))
        start += width
    return LayeredRooted(Digraph(size, rows), 0, tuple(layers), layers[-1])


def bipartite_gadget_height(a: int, k: int, d: int) -> int:
    # Height 0 would make every root its own leaf (leaf->root arcs become loops).
    return max(1, ceil_log(k, a * comb(d, k)))


def build_bipartite_gadget(
    a: int, b: int, k: int, d: int, cap: int = DEFAULT_VERTEX_CAP, height: int | None = None
) -> Gadget:
    """d disjoint d-out-arborescences with an arc from every leaf to every root."""
    if min(a, b) < 1:
        raise ParameterInfeasible("side sizes must be positive")
    if k < 2:
        raise ParameterInfeasible(f"k must be at least 2 (log base k), got {k}")
    if k < b:
        raise ParameterInfeasible(f"need k >= |B| = {b}, got k = {k}")
    if d < k:
        raise ParameterInfeasible(f"need d >= k, got d = {d}, k = {k}")
    faithful_height = bipartite_gadget_height(a, k, d)
    h = faithful_height if height is None else height
    if h < 1:
        raise ParameterInfeasible("height must be at least 1")
    tree = arborescence_size(d, h)
    _check_cap(d * tree, cap, f"bipartite_gadget({a}, {b}, {k}, {d})")
    base = out_arborescence(d, h, cap=tree)
    roots = [i * tree for i in range(d)]
    rows: list[list[int]] = []
    for i in range(d):
        off = i * tree
        for v in range(tree):
            if v in base.bottom:
                rows.append(list(roots))
            else:
                rows.append([off + c for c in base.graph.out_adj[v]])
    layer_sizes = [d * len(layer) for layer in base.layers]
    return Gadget(
        "bipartite-gadget",
        Digraph(d * tree, rows),
        {"a": a, "b": b, "k": k, "d": d, "height": h},
        layer_sizes,
        tuple(roots),
        faithful=h == faithful_height,
    )


def bipartite_gadget(a: int, b: int, k: int, d: int, cap: int = DEFAULT_VERTEX_CAP) -> Digraph:
    return build_bipartite_gadget(a, b, k, d, cap).graph


def layered_gadget_height(k: int, d: int) -> int:
    return ceil_log(k, 2**d * k)


def layered_gadget_size(k: int, d: int, t: int, height: int | None = None) -> int:
    """Exact vertex count of ``layered_gadget(k, d, t)``."""
    h = layered_gadget_height(k, d) if height is None else height
    tree = arborescence_size(d, h)
    leaves = d**h
    size = 1
    for _ in range(2, t + 1):
        size = (tree - leaves) + leaves * size + d
    return size


def layered_gadget(
    k: int, d: int, t: int, cap: int = DEFAULT_VERTEX_CAP, height: int | None = None
) -> LayeredRooted:
    """Layered rooted digraph with out-degree d off the bottom layer, built by recursion on t.

    ``height`` overrides the arborescence height; such outputs are flagged non-faithful.
    """
    if k < 2:
        raise ParameterInfeasible(f"k must be at least 2, got {k}")
    if d < k:
        raise ParameterInfeasible(f"need d >= k, got d = {d}, k = {k}")
    if t < 1:
        raise ParameterInfeasible("t must be at least 1")
    faithful_height = layered_gadget_height(k, d)
    h = faithful_height if height is None else height
    if h < 1:
        raise ParameterInfeasible("arborescence height must be at least 1")
    required = layered_gadget_size(k, d, t, h)
    _check_cap(required, cap, f"layered_gadget({k}, {d}, {t})")

    rows: list[list[int]] = []

    def new_vertex() -> int:
        rows.append([])
        return len(rows) - 1

    def build(level_t: int, root: int) -> tuple[list[list[int]], list[int]]:
        # Returns (layers relative to root, bottom vertices).
        if level_t == 1:
            return [[root]], [root]
        layers = [[root]]
        frontier = [root]
        for _ in range(h):
            nxt = []
            for v in frontier:
                for _ in range(d):
                    c = new_vertex()
                    rows[v].append(c)
                    nxt.append(c)
            layers.append(nxt)
            frontier = nxt
        sub_layers: list[list[int]] | None = None
        bottoms: list[int] = []
        for leaf in frontier:
            sl, sb = build(level_t - 1, leaf)
            bottoms.extend(sb)
            if sub_layers is None:
                sub_layers = [list(x) for x in sl]
            else:
                for i, layer in enumerate(sl):
                    sub_layers[i].extend(layer)
        assert sub_layers is not None
        layers.extend(sub_layers[1:])
        B = [new_vertex() for _ in range(d)]
        for v in bottoms:
            rows[v].extend(B)
        layers.append(B)
        return layers, B

    root = new_vertex()
    layers, bottom = build(t, root)
    g = Digraph(len(rows), rows)
    return LayeredRooted(
        g, root, tuple(frozenset(x) for x in layers), frozenset(bottom), faithful=h == faithful_height
    )


def build_forest_gadget(T: Pattern | Digraph, d: int, cap: int = DEFAULT_VERTEX_CAP, height: int | None = None) -> Gadget:
    """d copies of layered_gadget(|T|, d, 2|T|), every bottom vertex joined to all d roots."""
    Tg = T.graph if isinstance(T, Pattern) else T
    if not (is_oriented_forest(Tg) and is_weakly_connected(Tg)) or Tg.order == 0:
        raise NotATree("forest_gadget needs an oriented tree")
    k = Tg.order
    if k < 2:
        raise ParameterInfeasible("the tree needs at least two vertices (k = |V(T)| >= 2)")
    if d < k:
        raise ParameterInfeasible(f"need d >= |V(T)| = {k}, got {d}")
    t = 2 * k
    h = layered_gadget_height(k, d) if height is None else height
    one = layered_gadget_size(k, d, t, h)
    _check_cap(d * one, cap, f"forest_gadget(|T|={k}, d={d})")
    base = layered_gadget(k, d, t, cap=one, height=height)
    size = base.graph.n
    roots = [i * size + base.root for i in range(d)]
    rows: list[list[int]] = []
    for i in range(d):
        off = i * size
        for v in range(size):
            if v in base.bottom:
                rows.append(list(roots))
            else:
                rows.append([off + c for c in base.graph.out_adj[v]])
    return Gadget(
        "forest-gadget",
        Digraph(d * size, rows),
        {"tree_vertices": k, "d": d, "t": t, "height": h},
        [d * s for s in base.layer_sizes()],
        tuple(roots),
        faithful=base.faithful,
    )


def forest_gadget(T: Pattern | Digraph, d: int, cap: int = DEFAULT_VERTEX_CAP) -> Digraph:
    return build_forest_gadget(T, d, cap).graph


def _repair_permutation(sigma, used, rng, max_steps, loops=True):
    n = len(sigma)

    def bad(v, target):
        return (loops and target == v) or target in used[v]

    conflicts = [v for v in range(n) if bad(v, sigma[v])]
    steps = 0
    while conflicts:
        if steps > max_steps:
            return False
        v = conflicts.pop()
        if not bad(v, sigma[v]):
            continue
        steps += 1
        # Swap targets with a random position so that both end up legal.
        for u in rng.integers(0, n, size=32).tolist():
            if u == v:
                continue
            if not bad(v, sigma[u]) and not bad(u, sigma[v]):
                sigma[u], sigma[v] = sigma[v], sigma[u]
                break
        else:
            conflicts.insert(0, v)
    return True


def _matching_permutation(used, rng, loops=True):
    """A random permutation avoiding ``used`` (and fixed points), or None.

    When every earlier layer is a permutation the allowed pairs form a regular
    bipartite graph, so a perfect matching exists. This is the fallback for when
    local repair stalls near the complete digraph.
    """
    n = len(used)
    cost = rng.random((n, n))
    for v in range(n):
        for u in used[v]:
            cost[v, u] = np.inf
        if loops:
            cost[v, v] = np.inf
    try:
        rows, cols = linear_sum_assignment(cost)
    except ValueError:
        return None
    if not np.all(np.isfinite(cost[rows, cols])):
        return None
    sigma = [0] * n
    for r, c in zip(rows.tolist(), cols.tolist()):
        sigma[r] = c
    return sigma


def random_regular_digraph(n: int, d: int, seed: int, max_attempts: int = 50) -> Digraph:
    """Union of d random permutations, each repaired until loop-free and parallel-free.

    Every vertex ends with in- and out-degree exactly d. Conflicting positions are
    fixed by random transpositions; if repair keeps stalling, a random-cost
    assignment on the allowed pairs supplies the permutation. Deterministic in ``seed``.
    """
    if d < 0 or n < 0:
        raise ParameterInfeasible("n and d must be non-negative")
    if d >= n and not (n == 0 or d == 0):
        raise RetryBudgetExceeded(f"no simple {d}-regular digraph on {n} vertices")
    rng = stream(seed, "random_regular", n, d)
    used: list[set[int]] = [set() for _ in range(n)]
    for _ in range(d):
        for _attempt in range(min(max_attempts, REPAIR_ATTEMPTS)):
            sigma = rng.permutation(n).tolist()
            if _repair_permutation(sigma, used, rng, max_steps=20 * n + 100):
                break
        else:
            sigma = _matching_permutation(used, rng)
            if sigma is None:
                raise RetryBudgetExceeded(f"could not extend to a {d}-regular digraph on {n} vertices")
        for v in range(n):
            used[v].add(sigma[v])
    g = Digraph(n, [sorted(s) for s in used])
    assert is_regular(g) == d
    return g


def random_tripartite_digraph(n: int, d: int, seed: int) -> tuple[Digraph, dict[int, str]]:
    """Classes by ``v mod 3``; each vertex gets d distinct out-neighbours in the other two classes."""
    if n < 3:
        raise ParameterInfeasible("need at least three vertices")
    others = n - (n + 2) // 3
    if d > others:
        raise ParameterInfeasible(f"out-degree {d} exceeds the {others} vertices outside a class")
    rng = stream(seed, "random_tripartite", n, d)
    rows = []
    for v in range(n):
        pool = [u for u in range(n) if u % 3 != v % 3]
        rows.append(sorted(rng.choice(pool, size=d, replace=False).tolist()))
    classes = {v: "ABC"[v % 3] for v in range(n)}
    return Digraph(n, rows), classes


def random_cayley_lift(
    base: int, generators, blob: int, copies: int, seed: int, max_attempts: int = 50
) -> Digraph:
    """Random lift of the Cayley digraph of Z_base with the given generators.

    Vertex ``i * blob + j`` lies over group element i. Each generator s contributes
    ``copies`` arc-disjoint random perfect matchings from blob i to blob i + s, so
    the result is (len(generators) * copies)-regular. Every closed walk projects to
    a closed walk of the base, so directed cycles absent from the base stay absent.
    """
    gens = sorted({g % base for g in generators})
    if 0 in gens:
        raise ParameterInfeasible("generator 0 would create loops")
    if copies > blob:
        raise ParameterInfeasible(f"{copies} disjoint matchings need blobs of size >= {copies}")
    rng = stream(seed, "cayley_lift", base, tuple(gens), blob, copies)
    n = base * blob
    used: list[set[int]] = [set() for _ in range(n)]
    for i in range(base):
        for s in gens:
            target = ((i + s) % base) * blob
            local: list[set[int]] = [set() for _ in range(blob)]
            for _ in range(copies):
                for _attempt in range(min(max_attempts, REPAIR_ATTEMPTS)):
                    sigma = rng.permutation(blob).tolist()
                    if _repair_permutation(sigma, local, rng, 20 * blob + 100, loops=False):
                        break
                else:
                    sigma = _matching_permutation(local, rng, loops=False)
                    if sigma is None:
                        raise RetryBudgetExceeded("could not draw disjoint matchings")
                for j in range(blob):
                    local[j].add(sigma[j])
            for j in range(blob):
                used[i * blob + j].update(target + x for x in local[j])
    g = Digraph(n, [sorted(r) for r in used])
    assert is_regular(g) == len(gens) * copies
    return g
