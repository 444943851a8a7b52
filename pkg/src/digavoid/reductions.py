"""Reductions that pass to subdigraphs avoiding orientations of the 3- and 5-cycle.

Every public operation re-verifies its postconditions before returning and
raises instead of handing back an unverified digraph.
"""

from __future__ import annotations

import heapq
import time
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cycles import closed_walks, directed_cycles, find_directed_cycle
from .digraph import Digraph, MultiDigraph, degeneracy_ordering, degree_stats, min_out_degree, reachable_set
from .errors import (
    ColoringInvalid,
    DigavoidError,
    NotTripartite,
    ParameterInfeasible,
    ResampleBudgetExceeded,
    RestrictionInfeasible,
    VerificationFailed,
    VNotIndependent,
)
from .patterns import STANDARD_SIX, cycle_orientation, find_pattern
from .resample import BadEvent, ResampleConfig, all_present, count_outside, mt_resample
from .rng import arc_uniforms, derive_seed, stream

CLASSES = ("A", "B", "C")


# ---------------------------------------------------------------------------
# shared helpers


@dataclass
class ReductionReport:
    stage: str
    n: int
    m: int
    min_out_before: int
    min_out_after: int
    rounds: int
    restarts: int
    seed: int
    verified: bool
    violations: list = field(default_factory=list)
    profile: str = "desk"
    faithful: bool = True
    runtime_ms: int = 0

    def __post_init__(self):
        if self.verified != (not self.violations):
            raise ValueError("verified must be true exactly when there are no violations")

    def to_json(self) -> dict:
        return asdict(self)


def trim_out_degrees(D: Digraph, targets: Mapping[int, int] | int, seed: int, label: str = "trim") -> Digraph:
    """Keep ``targets[v]`` out-arcs per vertex, chosen by a seeded hash of each arc."""
    rows: list[list[int]] = []
    n = D.n
    for u in range(n):
        row = D.out_adj[u]
        want = targets if isinstance(targets, int) else targets.get(u, len(row))
        if len(row) <= want:
            rows.append(list(row))
            continue
        keys = np.asarray(row, dtype=np.int64) + u * n
        ranks = np.argsort(arc_uniforms(seed, keys, label), kind="stable")[:want]
        rows.append([row[i] for i in sorted(ranks.tolist())])
    return D.with_out_adj(rows)


def _arc_index(D: Digraph) -> tuple[list[tuple[int, int]], dict[tuple[int, int], int]]:
    arcs = D.arc_list()
    return arcs, {a: i for i, a in enumerate(arcs)}


def _graph_from_mask(D: Digraph, arcs, mask) -> Digraph:
    rows: list[list[int]] = [[] for _ in range(D.n)]
    for (u, v), keep in zip(arcs, mask):
        if keep:
            rows[u].append(v)
    return D.with_out_adj(rows)


def _big(x) -> str:
    """Readable form for the astronomically large paper constants."""
    if isinstance(x, int) and x.bit_length() > 64:
        return f"~10^{len(str(x)) - 1}"
    return f"{x:g}" if isinstance(x, float) else str(x)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


# ---------------------------------------------------------------------------
# majority colouring and tripartite restriction


def majority_violations(D: Digraph, coloring: Mapping[int, str], fraction: int = 3) -> list[int]:
    """Vertices with fewer than ceil(d+(v)/fraction) differently coloured out-neighbours."""
    bad = []
    for v in D.vertex_list():
        row = D.out_adj[v]
        c = coloring[v]
        diff = sum(1 for u in row if coloring[u] != c)
        if diff < _ceil_div(len(row), fraction):
            bad.append(v)
    return bad


def majority_3_coloring(
    D: Digraph, cfg: ResampleConfig, two_colors: bool = False, stats: dict | None = None
) -> dict[int, str]:
    """Colour so every vertex has >= ceil(d+/3) out-neighbours of another colour.

    Local search: a violated vertex takes the least frequent colour among its
    out-neighbours; random restarts on stall. ``two_colors`` tries the
    (conjectural) half-fraction variant with two colours; experimental only.
    """
    palette = CLASSES[:2] if two_colors else CLASSES
    q = len(palette)
    fraction = 2 if two_colors else 3
    verts = D.vertex_list()
    need = {v: _ceil_div(len(D.out_adj[v]), fraction) for v in verts}
    total_steps = 0
    for restart in range(cfg.restarts):
        rng = stream(cfg.seed, "majority", restart)
        col = [0] * D.n
        drawn = rng.integers(0, q, size=D.n).tolist()
        for v in verts:
            col[v] = drawn[v]

        def violated(v):
            c = col[v]
            return sum(1 for u in D.out_adj[v] if col[u] != c) < need[v]

        heap = [v for v in verts if violated(v)]
        queued = set(heap)
        heapq.heapify(heap)
        steps = 0
        while heap and steps < cfg.max_rounds:
            v = heapq.heappop(heap)
            queued.discard(v)
            if not violated(v):
                continue
            counts = [0] * q
            for u in D.out_adj[v]:
                counts[col[u]] += 1
            col[v] = min(range(q), key=lambda c: (counts[c], c))
            steps += 1
            for w in D.in_adj[v]:
                if w not in queued and violated(w):
                    queued.add(w)
                    heapq.heappush(heap, w)
        total_steps += steps
        if not heap:
            coloring = {v: palette[col[v]] for v in verts}
            if not majority_violations(D, coloring, fraction):
                if stats is not None:
                    stats.update(rounds=total_steps, restarts=restart)
                return coloring
    raise ResampleBudgetExceeded(
        f"no majority colouring found within {cfg.restarts} restart(s) of {cfg.max_rounds} steps",
        rounds=total_steps,
        restarts=cfg.restarts,
    )


@dataclass
class TypedPartition:
    """3-partition plus, for s >= 1, a class word per vertex bounding its forward walks."""

    classes: dict[int, str]
    s: int = 0
    types: dict[int, tuple[str, ...]] = field(default_factory=dict)

    def members(self, cls: str) -> set[int]:
        return {v for v, c in self.classes.items() if c == cls}

    def violations(self, D: Digraph, sample: Iterable[int] | None = None) -> list[str]:
        out = []
        for u, v in D.arc_list():
            if self.classes[u] == self.classes[v]:
                out.append(f"arc ({u}, {v}) inside class {self.classes[u]}")
                if len(out) > 20:
                    return out
        vs = D.vertex_list() if sample is None else list(sample)
        for v in vs if self.s else ():
            t = self.types.get(v)
            if t is None or len(t) != self.s:
                out.append(f"vertex {v} has no {self.s}-type")
                continue
            frontier = {v}
            for i in range(1, self.s + 1):
                frontier = reachable_set(D, frontier, 1)
                stray = [u for u in frontier if self.classes[u] != t[i - 1]]
                if stray:
                    out.append(f"vertex {v}: walk of length {i} reaches {stray[0]} outside class {t[i - 1]}")
                    break
        return out


def tripartite_restrict(D: Digraph, coloring: Mapping[int, str]) -> tuple[Digraph, TypedPartition]:
    """Drop monochromatic arcs; the colouring must satisfy the majority condition."""
    bad = majority_violations(D, coloring)
    if bad:
        raise ColoringInvalid(f"{len(bad)} vertex/vertices violate the majority condition, e.g. {bad[0]}")
    rows = [[u for u in D.out_adj[v] if coloring[u] != coloring[v]] for v in range(D.n)]
    out = D.with_out_adj(rows)
    tp = TypedPartition({v: coloring[v] for v in D.vertex_list()}, 0, {})
    need = _ceil_div(min_out_degree(D), 3)
    problems = tp.violations(out)
    if min_out_degree(out) < need:
        problems.append(f"min out-degree {min_out_degree(out)} below {need}")
    if problems:
        raise VerificationFailed("tripartite restriction failed its own check", problems)
    return out, tp


def _compatible(t: tuple, g: tuple) -> bool:
    return all(a is None or a == b for a, b in zip(t, g))


def extract_typed(D: Digraph, partition: TypedPartition, s: int) -> tuple[Digraph, TypedPartition]:
    """Spanning s-typed subdigraph keeping, per vertex, the largest same-type share of out-arcs."""
    if s < 0:
        raise ValueError("s must be non-negative")
    classes = partition.classes
    for u, v in D.arc_list():
        if classes[u] == classes[v]:
            raise NotTripartite(f"arc ({u}, {v}) lies inside class {classes[u]}")
    verts = D.vertex_list()
    rows = [list(r) for r in D.out_adj]
    types: dict[int, tuple] = {v: () for v in verts}
    for j in range(1, s + 1):
        new_types: dict[int, tuple] = {}
        new_rows = [list(r) for r in rows]
        for v in verts:
            row = rows[v]
            if not row:
                new_types[v] = (None,) * j
                continue
            if j == 1:
                keys = {u: (classes[u],) for u in row}
            else:
                keys = {u: types[u] for u in row}
            full = Counter(k for k in keys.values() if None not in k)
            candidates = sorted(full) if full else sorted(set(keys.values()), key=lambda k: tuple(x or "" for x in k))
            best = None
            best_members: list[int] = []
            for g in candidates:
                members = [u for u in row if _compatible(keys[u], g)]
                if len(members) > len(best_members):
                    best, best_members = g, members
            new_rows[v] = best_members
            head = (classes[best_members[0]],) if j >= 2 else ()
            new_types[v] = head + tuple(best) if j >= 2 else tuple(best)
        rows, types = new_rows, new_types
    # Unconstrained (empty-walk) positions get a fixed letter.
    final_types = {v: tuple(x if x is not None else "A" for x in t) for v, t in types.items()}
    out = D.with_out_adj(rows)
    tp = TypedPartition(dict(classes), s, final_types if s else {})
    problems = tp.violations(out)
    need = _ceil_div(min_out_degree(D), 3**s)
    if min_out_degree(out) < need:
        problems.append(f"min out-degree {min_out_degree(out)} below ceil(d/3^s) = {need}")
    if problems:
        raise VerificationFailed("typed extraction failed its own check", problems)
    return out, tp


# ---------------------------------------------------------------------------
# directed-cycle avoidance


def avoid_directed_cycles(
    D: Digraph, lengths: Iterable[int], k: int, cfg: ResampleConfig, stats: dict | None = None
) -> Digraph:
    """Subdigraph with min out-degree >= k and no directed cycle of the given lengths.

    Trims every vertex to ``cfg.d_trim`` out-arcs, keeps each arc with probability
    ``cfg.p`` and resamples surviving cycles and under-degree vertices.
    """
    lengths = sorted(set(lengths))
    if k < 1:
        raise ParameterInfeasible("k must be at least 1")
    if min_out_degree(D) < cfg.d_trim:
        raise ParameterInfeasible(f"min out-degree {min_out_degree(D)} below d_trim = {_big(cfg.d_trim)}")
    if Fraction(cfg.d_trim) * Fraction(cfg.p) < k and not cfg.override:
        raise ParameterInfeasible(f"d_trim * p = {cfg.d_trim * cfg.p:g} is below k = {k}")
    T = trim_out_degrees(D, cfg.d_trim, cfg.seed, "dicycle-trim")
    arcs, index = _arc_index(T)
    events: list[BadEvent] = []
    for v in T.vertex_list():
        events.append(count_outside("out_degree_low", v, [index[(v, u)] for u in T.out_adj[v]], k))
    n_cycles = 0
    for length in lengths:
        if closed_walks(T, length) == 0:
            continue
        for cyc in directed_cycles(T, length):
            ids = [index[(a, b)] for a, b in zip(cyc, cyc[1:] + cyc[:1])]
            events.append(all_present("cycle_survives", cyc, ids))
            n_cycles += 1
    res = mt_resample(len(arcs), events, cfg, label="dicycles")
    out = _graph_from_mask(T, arcs, res.assignment)
    problems = []
    if min_out_degree(out) < k:
        problems.append(f"min out-degree {min_out_degree(out)} below {k}")
    for length in lengths:
        cyc = find_directed_cycle(out, length)
        if cyc is not None:
            problems.append(f"directed {length}-cycle {cyc} survives")
    if problems:
        raise VerificationFailed("directed-cycle avoidance failed its own check", problems)
    if stats is not None:
        stats.update(rounds=res.rounds, restarts=res.restarts, cycles=n_cycles)
    return out


# ---------------------------------------------------------------------------
# the auxiliary multidigraph and the C5_2 procedure


def build_aux_H(D: Digraph, V: Iterable[int]) -> MultiDigraph:
    """Arc (u, v) tagged w for each out-arc (u, w) starting a 3-arc walk u->w->x->v,
    whenever u, v in V are distinct and share an out-neighbour."""
    V = frozenset(V)
    for u in V:
        for w in D.out_adj[u]:
            if w in V:
                raise VNotIndependent(f"arc ({u}, {w}) joins two vertices of V")
    arcs = []
    for u in sorted(V):
        out_u = D.out_set(u)
        if not out_u:
            continue
        for w in D.out_adj[u]:
            targets: set[int] = set()
            for x in D.out_adj[w]:
                for v in D.out_adj[x]:
                    if v in V and v != u:
                        targets.add(v)
            for v in sorted(targets):
                if not out_u.isdisjoint(D.out_set(v)):
                    arcs.append((u, v, w))
    return MultiDigraph(D.n, arcs, V)


def _c5_gate(k: int, cfg: ResampleConfig) -> None:
    if cfg.override:
        return
    if cfg.profile == "paper_faithful" and k < 100:
        raise ParameterInfeasible(f"paper-faithful profile needs k >= 100, got {k}")
    half = Fraction(cfg.d_trim) * Fraction(cfg.p) / 2
    if half < 3 * k**4:
        raise ParameterInfeasible(f"d_trim * p / 2 = {float(half):g} is below 3k^4 = {3 * k**4}")


def earlier_in_neighbours(H: MultiDigraph, ordering: Sequence[int]) -> dict[int, set[int]]:
    pos = {v: i for i, v in enumerate(ordering)}
    out: dict[int, set[int]] = {v: set() for v in ordering}
    for u, v, _ in H.arcs:
        if pos[u] < pos[v]:
            out[v].add(u)
    return out


def claim_order_and_sample(
    D: Digraph, V: Iterable[int], k: int, cfg: ResampleConfig, stats: dict | None = None
) -> tuple[Digraph, list[int]]:
    """Spanning F and an ordering of V: V keeps about d_trim*p out-arcs, others exactly k,
    and each v_i has at most 2k earlier in-neighbours in H(F)."""
    V = frozenset(V)
    _c5_gate(k, cfg)
    d = cfg.d_trim
    lo = d * cfg.p / 2
    hi = 3 * d * cfg.p / 2
    targets = {}
    for v in D.vertex_list():
        deg = len(D.out_adj[v])
        want = d if v in V else k
        if deg < want:
            raise ParameterInfeasible(
                f"vertex {v} has out-degree {deg}, needs {_big(want)} ({'d_trim' if v in V else 'k'})"
            )
        targets[v] = want
    F0 = trim_out_degrees(D, targets, cfg.seed, "claim-trim")
    if not V:
        if stats is not None:
            stats.update(rounds=0, restarts=0)
        return F0, []
    H0 = build_aux_H(F0, V)
    ordering = degeneracy_ordering(H0)
    pos = {v: i for i, v in enumerate(ordering)}
    # variables: out-arcs of V
    var_arcs = [(u, w) for u in ordering for w in F0.out_adj[u]]
    var_of = {a: i for i, a in enumerate(var_arcs)}
    out_vars = {u: [var_of[(u, w)] for w in F0.out_adj[u]] for u in ordering}
    # earlier H0 in-arcs grouped by source, with the tag variables
    tagged: dict[int, dict[int, list[int]]] = {v: defaultdict(list) for v in ordering}
    for u, v, w in H0.arcs:
        if pos[u] < pos[v]:
            tagged[v][u].append(var_of[(u, w)])
    out_heads = {u: list(F0.out_adj[u]) for u in ordering}

    events: list[BadEvent] = []
    for v in ordering:
        events.append(count_outside("degree_out_of_range", v, out_vars[v], lo, hi))
        sources = tagged[v]
        if not sources:
            continue
        deps = set(out_vars[v])
        for u in sources:
            deps.update(out_vars[u])

        def holds(x, v=v, sources=sources):
            mine = {w for w, i in zip(out_heads[v], out_vars[v]) if x[i]}
            count = 0
            for u, tag_vars in sources.items():
                if not any(x[i] for i in tag_vars):
                    continue
                if any(x[i] and w in mine for w, i in zip(out_heads[u], out_vars[u])):
                    count += 1
                    if count > 2 * k:
                        return True
            return False

        events.append(BadEvent("too_many_H_in_neighbors", v, tuple(sorted(deps)), holds))
    res = mt_resample(len(var_arcs), events, cfg, label="claim")
    x = res.assignment
    rows = [list(F0.out_adj[u]) if u not in V else [] for u in range(D.n)]
    for (u, w), keep in zip(var_arcs, x):
        if keep:
            rows[u].append(w)
    F = D.with_out_adj(rows)
    problems = check_claim(F, V, ordering, k, lo if cfg.override else max(lo, 3 * k**4))
    if problems:
        raise VerificationFailed("claim sampling failed its own check", problems)
    if stats is not None:
        stats.update(rounds=res.rounds, restarts=res.restarts)
    return F, ordering


def check_claim(F: Digraph, V: frozenset, ordering: Sequence[int], k: int, v_lower: float) -> list[str]:
    problems = []
    for v in F.vertex_list():
        deg = len(F.out_adj[v])
        if v in V and deg < v_lower:
            problems.append(f"vertex {v} in V has out-degree {deg} < {v_lower:g}")
        elif v not in V and deg != k:
            problems.append(f"vertex {v} outside V has out-degree {deg} != {k}")
    H = build_aux_H(F, V)
    for v, ins in earlier_in_neighbours(H, ordering).items():
        if len(ins) > 2 * k:
            problems.append(f"vertex {v} has {len(ins)} earlier in-neighbours in H(F) > 2k")
    return problems


def _greedy_independent(nodes: list[int], adj: dict[int, set[int]], want: int) -> list[int]:
    alive = set(nodes)
    deg = {v: len(adj[v] & alive) for v in nodes}
    chosen: list[int] = []
    while alive and len(chosen) < want:
        v = min(alive, key=lambda x: (deg[x], x))
        chosen.append(v)
        gone = (adj[v] & alive) | {v}
        alive -= gone
        for g in gone:
            for y in adj[g]:
                if y in alive:
                    deg[y] -= 1
    return chosen


def sequential_restriction(F: Digraph, ordering: Sequence[int], V: Iterable[int], k: int) -> Digraph:
    """Give each v_i in order exactly k out-arcs so that H of the result has no arcs inside V."""
    V = frozenset(V)
    if not ordering:
        return F
    H = build_aux_H(F, V)
    pos = {v: i for i, v in enumerate(ordering)}
    h_in: dict[int, dict[int, set[int]]] = {v: defaultdict(set) for v in ordering}
    for u, v, w in H.arcs:
        h_in[v][u].add(w)
    cur: dict[int, set[int]] = {v: set(F.out_adj[v]) for v in ordering}
    done: set[int] = set()
    for v in ordering:
        # (a) avoid out-neighbourhoods of earlier H-in-neighbours still joined to v
        blocked: set[int] = set()
        for u, tags in h_in[v].items():
            if u in done and not tags.isdisjoint(cur[u]):
                blocked |= cur[u]
        pool = sorted(cur[v] - blocked)
        pool_set = set(pool)
        # (b) conflict graph: w1 ~ w2 if w1 -> x -> v_j -> w2 for an earlier v_j
        adj: dict[int, set[int]] = {w: set() for w in pool}
        selfloop: set[int] = set()
        for w1 in pool:
            for x in F.out_adj[w1]:
                for vj in F.out_adj[x]:
                    if vj in done:
                        for w2 in cur[vj] & pool_set:
                            if w2 == w1:
                                selfloop.add(w1)
                            else:
                                adj[w1].add(w2)
                                adj[w2].add(w1)
        nodes = [w for w in pool if w not in selfloop]
        chosen = _greedy_independent(nodes, adj, k)
        if len(chosen) < k:
            raise RestrictionInfeasible(
                f"vertex {v}: only {len(chosen)} conflict-free out-neighbours from a pool of {len(pool)}",
                vertex=v,
            )
        cur[v] = set(chosen)
        done.add(v)
    rows = [sorted(cur[u]) if u in V else list(F.out_adj[u]) for u in range(F.n)]
    return F.with_out_adj(rows)


def c5_sources_violations(D: Digraph, V: frozenset) -> list[str]:
    phi = find_pattern(D, cycle_orientation("C5_2"), anchors={0: V})
    return [] if phi is None else [f"C5_2 copy with source {phi[0]}: {phi}"]


def avoid_c5_from_class(
    D: Digraph, tp: TypedPartition, cls: str, k: int, cfg: ResampleConfig, stats: dict | None = None
) -> Digraph:
    """Every vertex gets out-degree exactly k; no C5_2 has its source in N^-(cls)."""
    if cls not in CLASSES:
        raise ValueError(f"class must be one of {CLASSES}")
    if tp.s < 1:
        raise ParameterInfeasible("needs a 1-typed input (s >= 1)")
    problems = tp.violations(D)
    if problems:
        raise ParameterInfeasible(f"partition does not witness typedness: {problems[0]}")
    if find_pattern(D, cycle_orientation("C3_1")) is not None:
        raise ParameterInfeasible("input contains a directed triangle")
    members = tp.members(cls)
    V = frozenset(v for v in D.vertex_list() if any(u in members for u in D.out_adj[v]))
    local = dict(rounds=0, restarts=0)
    if not V:
        if min_out_degree(D) < k:
            raise ParameterInfeasible(f"min out-degree {min_out_degree(D)} below k = {k}")
        out = trim_out_degrees(D, k, cfg.seed, "claim-trim")
    else:
        F, ordering = claim_order_and_sample(D, V, k, cfg, local)
        out = sequential_restriction(F, ordering, V, k)
    problems = [f"vertex {v} has out-degree {len(out.out_adj[v])} != {k}" for v in out.vertex_list() if len(out.out_adj[v]) != k]
    problems += c5_sources_violations(out, V)
    if problems:
        raise VerificationFailed(f"C5_2 avoidance from class {cls} failed its own check", problems)
    if stats is not None:
        stats.update(local, sources=len(V))
    return out


# ---------------------------------------------------------------------------
# the composed pipeline


@dataclass(frozen=True)
class PipelinePlan:
    """Per-stage degree targets and resampling configs for the six-stage pipeline."""

    k: int
    dicycle_k: int
    dicycle_cfg: ResampleConfig
    coloring_cfg: ResampleConfig
    c5_k: tuple[int, int, int]
    c5_cfgs: tuple[ResampleConfig, ResampleConfig, ResampleConfig]
    profile: str = "desk"
    c5_p_exact: tuple[Fraction, ...] | None = None

    @property
    def stage0_demand(self) -> int:
        return self.dicycle_cfg.d_trim

    @classmethod
    def paper_faithful(cls, k: int, seed: int = 0) -> "PipelinePlan":
        # D4, D5, D6 reach k^(20^2), k^20, k; each needs d = target^20 and p = target^-15.
        # Those probabilities underflow a float, so they are kept exact and only
        # converted when a stage actually runs.
        ks = (k**400, k**20, k)
        c5 = tuple(
            ResampleConfig(p=1.0, d_trim=t**20, seed=derive_seed(seed, "c5", i), profile="paper_faithful")
            for i, t in enumerate(ks)
        )
        d1 = 27 * k ** (20**3)
        dic = ResampleConfig(p=1.0, d_trim=d1, seed=derive_seed(seed, "dicycles"), profile="paper_faithful")
        col = ResampleConfig(seed=derive_seed(seed, "coloring"), profile="paper_faithful")
        return cls(k, d1, dic, col, ks, c5, "paper_faithful", tuple(Fraction(1, t**15) for t in ks))

    @classmethod
    def desk(cls, k: int = 2, seed: int = 0, c5_k=None, c5_p: float = 1.0, dicycle_k: int | None = None,
             dicycle_d_trim: int = 0, dicycle_p: float = 1.0, max_rounds: int = 20000, restarts: int = 5) -> "PipelinePlan":
        """Calibrated small constants; arithmetic gates are off and every stage is re-verified.

        A ``d_trim`` of 0 means "the current minimum out-degree" and is resolved
        when the stage runs; ``dicycle_k`` of None means half the expected kept degree.
        """
        ks = tuple(c5_k) if c5_k is not None else (2 * k, k + 1, k)
        c5 = tuple(
            ResampleConfig(p=c5_p, d_trim=0, seed=derive_seed(seed, "c5", i), override=True,
                           max_rounds=max_rounds, restarts=restarts)
            for i in range(3)
        )
        dic = ResampleConfig(p=dicycle_p, d_trim=dicycle_d_trim, seed=derive_seed(seed, "dicycles"),
                             override=True, max_rounds=max_rounds, restarts=restarts)
        col = ResampleConfig(seed=derive_seed(seed, "coloring"), max_rounds=max_rounds, restarts=restarts)
        return cls(k, dicycle_k if dicycle_k is not None else 0, dic, col, ks, c5, "desk")


class PipelineFailed(DigavoidError):
    """A stage failed; ``reports`` holds every report up to and including the failure."""

    def __init__(self, message, reports, cause):
        self.reports = reports
        self.cause = cause
        super().__init__(message)


def _report(stage, before: Digraph, after: Digraph | None, info: dict, cfg: ResampleConfig, t0: float,
            problems=(), faithful=True) -> ReductionReport:
    g = after if after is not None else before
    return ReductionReport(
        stage=stage, n=g.n, m=g.m,
        min_out_before=min_out_degree(before),
        min_out_after=min_out_degree(after) if after is not None else 0,
        rounds=int(info.get("rounds", 0)), restarts=int(info.get("restarts", 0)), seed=cfg.seed,
        verified=not problems, violations=list(problems), profile=cfg.profile,
        faithful=faithful and not cfg.override, runtime_ms=int((time.perf_counter() - t0) * 1000),
    )


def verify_pipeline_output(D: Digraph, k: int) -> list[str]:
    problems = []
    if min_out_degree(D) < k:
        problems.append(f"min out-degree {min_out_degree(D)} below {k}")
    for name in STANDARD_SIX:
        phi = find_pattern(D, cycle_orientation(name))
        if phi is not None:
            problems.append(f"contains {name}: {phi}")
    return problems


def pipeline_avoid_c3_c5(D: Digraph, k: int, plan: PipelinePlan | None = None, seed: int = 0) -> tuple[Digraph, list[ReductionReport]]:
    """Chain directed-cycle removal, majority colouring, 2-typing and three C5_2 stages.

    The output has min out-degree >= k and contains none of the six orientations
    of the 3- and 5-cycle. A failing stage raises :class:`PipelineFailed`
    carrying the reports so far.
    """
    if plan is None:
        plan = PipelinePlan.desk(k, seed)
    reports: list[ReductionReport] = []

    def run(stage, before, cfg, fn, faithful=True):
        info: dict = {}
        t0 = time.perf_counter()
        try:
            out = fn(info)
        except DigavoidError as exc:
            problems = getattr(exc, "violations", None) or [str(exc)]
            reports.append(_report(stage, before, None, info, cfg, t0, problems, faithful))
            if isinstance(exc, ParameterInfeasible) and exc.stage is None:
                exc = ParameterInfeasible(str(exc), stage=stage)
            raise PipelineFailed(f"stage {stage} failed: {exc}", reports, exc) from exc
        graph = out[0] if isinstance(out, tuple) else out
        reports.append(_report(stage, before, graph, info, cfg, t0, (), faithful))
        return out

    dic_cfg = plan.dicycle_cfg
    if dic_cfg.d_trim == 0:
        dic_cfg = dic_cfg.replace(d_trim=min_out_degree(D))
    dic_k = plan.dicycle_k or max(plan.k, int(dic_cfg.d_trim * dic_cfg.p / 2))
    D1 = run("D1_avoid_directed_cycles", D, dic_cfg,
             lambda info: avoid_directed_cycles(D, (3, 5), dic_k, dic_cfg, info))

    def stage2(info):
        coloring = majority_3_coloring(D1, plan.coloring_cfg, stats=info)
        return tripartite_restrict(D1, coloring)

    D2, tp2 = run("D2_majority_tripartite", D1, plan.coloring_cfg, stage2)
    D3, tp3 = run("D3_typed", D2, plan.coloring_cfg, lambda info: extract_typed(D2, tp2, 2))
    current = D3
    for i, cls in enumerate(CLASSES):
        cfg = plan.c5_cfgs[i]
        target = plan.c5_k[i]
        stage = f"D{4 + i}_avoid_c5_from_{cls}"
        if plan.c5_p_exact is not None:
            p = float(plan.c5_p_exact[i])
            if p == 0.0:
                exc = ParameterInfeasible(f"keep probability {plan.c5_p_exact[i]} underflows a float", stage=stage)
                reports.append(_report(stage, current, None, {}, cfg, time.perf_counter(), [str(exc)]))
                raise PipelineFailed(f"stage {stage} failed: {exc}", reports, exc)
            cfg = cfg.replace(p=p)
        if cfg.d_trim == 0:
            # V keeps everything it has
            members = tp3.members(cls)
            V = [v for v in current.vertex_list() if any(u in members for u in current.out_adj[v])]
            cfg = cfg.replace(d_trim=min((len(current.out_adj[v]) for v in V), default=0))
        before = current
        current = run(stage, before, cfg,
                      lambda info, before=before, cls=cls, cfg=cfg, target=target:
                      avoid_c5_from_class(before, tp3, cls, target, cfg, info))
    problems = verify_pipeline_output(current, k)
    if problems:
        t0 = time.perf_counter()
        reports.append(_report("final_verification", current, current, {}, plan.c5_cfgs[-1], t0, problems))
        raise PipelineFailed("final verification failed", reports, VerificationFailed("final", problems))
    return current, reports
