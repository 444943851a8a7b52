"""Avoidance in regular host digraphs: short cycles, layered partitions, forests."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cycles import underlying_arc_cycles, underlying_vertex_cycles
from .digraph import Digraph, is_regular, min_out_degree
from .errors import NotRegular, NotRegularAvoidable, ParameterInfeasible, VerificationFailed
from .patterns import Pattern, find_pattern, is_grounded_forest, shortest_underlying_cycle
from .resample import BadEvent, ResampleConfig, all_present, count_outside, mt_resample


def _require_regular(D: Digraph) -> int:
    d = is_regular(D)
    if d is None:
        raise NotRegular("host digraph is not regular (in- and out-degrees must all agree)")
    return d


def regular_cycle_config(k: int, length: int, seed: int = 0, **kw) -> ResampleConfig:
    """Keep probability k^-length, the choice the degree analysis is built around."""
    return ResampleConfig(p=float(k) ** -length, seed=seed, **kw)


def avoid_short_cycle_regular(
    D: Digraph, length: int, k: int, cfg: ResampleConfig, stats: dict | None = None
) -> Digraph:
    """Subdigraph with min out-degree >= k and no cycle of the given length in the
    underlying multigraph (orientation ignored; length 2 means digons)."""
    d = _require_regular(D)
    if length < 2:
        raise ParameterInfeasible("cycle length must be at least 2")
    if not cfg.override:
        if cfg.profile == "paper_faithful" and d < 2 * k ** (length + 1):
            raise ParameterInfeasible(f"paper-faithful profile needs d >= 2k^(l+1) = {2 * k ** (length + 1)}, got {d}")
        if d * cfg.p / 2 < k:
            raise ParameterInfeasible(f"d * p / 2 = {d * cfg.p / 2:g} is below k = {k}")
    arcs = D.arc_list()
    index = {a: i for i, a in enumerate(arcs)}
    events: list[BadEvent] = []
    for v in D.vertex_list():
        events.append(count_outside("out_degree_low", v, [index[(v, u)] for u in D.out_adj[v]], k))
    n_cycles = 0
    for cyc in underlying_arc_cycles(D, length):
        events.append(all_present("cycle_survives", cyc, [index[a] for a in cyc]))
        n_cycles += 1
    res = mt_resample(len(arcs), events, cfg, label="regular-cycles")
    rows: list[list[int]] = [[] for _ in range(D.n)]
    for (u, v), keep in zip(arcs, res.assignment):
        if keep:
            rows[u].append(v)
    out = D.with_out_adj(rows)
    problems = []
    if min_out_degree(out) < k:
        problems.append(f"min out-degree {min_out_degree(out)} below {k}")
    cyc = next(underlying_vertex_cycles(out, length), None)
    if cyc is not None:
        problems.append(f"underlying {length}-cycle {cyc} survives")
    if problems:
        raise VerificationFailed("short-cycle removal failed its own check", problems)
    if stats is not None:
        stats.update(rounds=res.rounds, restarts=res.restarts, cycles=n_cycles)
    return out


@dataclass(frozen=True)
class PartitionProbabilities:
    """p_1..p_t in exact rationals: geometric with ratio 6k, summing to one."""

    k: int
    t: int

    def __post_init__(self):
        if self.k < 1 or self.t < 1:
            raise ParameterInfeasible("need k >= 1 and t >= 1")

    @property
    def fractions(self) -> list[Fraction]:
        r = Fraction(6 * self.k)
        scale = (1 - 1 / r) / (1 - r ** (-self.t))
        return [scale * r ** (i - self.t) for i in range(1, self.t + 1)]

    @property
    def floats(self) -> list[float]:
        return [float(p) for p in self.fractions]

    def violations(self) -> list[str]:
        ps = self.fractions
        out = []
        if sum(ps) != 1:
            out.append(f"probabilities sum to {sum(ps)}")
        for i in range(len(ps) - 1):
            if ps[i + 1] / ps[i] != 6 * self.k:
                out.append(f"p_{i + 2}/p_{i + 1} = {ps[i + 1] / ps[i]} != {6 * self.k}")
        return out


@dataclass(frozen=True)
class LayeredPartition:
    parts: tuple[frozenset[int], ...]

    @property
    def t(self) -> int:
        return len(self.parts)

    def part_of(self) -> dict[int, int]:
        return {v: i for i, part in enumerate(self.parts) for v in part}

    def violations(self, D: Digraph, k: int | None = None) -> list[str]:
        out = []
        where = self.part_of()
        if sum(len(p) for p in self.parts) != len(where) or set(where) != set(D.vertex_list()):
            out.append("parts do not partition the vertex set")
            return out
        for u, v in D.arc_list():
            if where[v] != (where[u] + 1) % self.t:
                out.append(f"arc ({u}, {v}) goes from V_{where[u] + 1} to V_{where[v] + 1}")
                break
        for v in D.vertex_list():
            if where[v] != 0 and len(D.in_adj[v]) > 1:
                out.append(f"vertex {v} outside V_1 has in-degree {len(D.in_adj[v])}")
                break
        if k is not None and min_out_degree(D) < k:
            out.append(f"min out-degree {min_out_degree(D)} below {k}")
        return out

    def to_json(self) -> list[list[int]]:
        return [sorted(p) for p in self.parts]


def _categorical(probs: Sequence[float]):
    cum = np.cumsum(probs)
    cum[-1] = 1.0

    def draw(rng, idx):
        return np.searchsorted(cum, rng.random(len(idx)), side="right").tolist()

    return draw


def layered_partition(
    D: Digraph, t: int, k: int, cfg: ResampleConfig, stats: dict | None = None
) -> tuple[Digraph, LayeredPartition]:
    """Random t-partition, arcs kept only from V_i to V_(i+1 mod t), then every vertex
    outside V_1 keeps one uniformly chosen in-arc."""
    d = _require_regular(D)
    probs = PartitionProbabilities(k, t)
    pf = probs.fractions
    if not cfg.override:
        if cfg.profile == "paper_faithful" and d < k ** (2 * t):
            raise ParameterInfeasible(f"paper-faithful profile needs d >= k^(2t) = {k ** (2 * t)}, got {d}")
        if pf[0] * d < 2 * k:
            raise ParameterInfeasible(f"p_1 * d = {float(pf[0] * d):g} is below 2k = {2 * k}")
    verts = D.vertex_list()
    n = D.n
    lows = [float(p * d / 2) for p in pf]
    highs = [float(3 * p * d / 2) for p in pf]

    # phase 1: colours of vertices
    events: list[BadEvent] = []
    for v in verts:
        outs, ins = D.out_adj[v], D.in_adj[v]

        def bad(x, outs=outs, ins=ins):
            co = [0] * t
            ci = [0] * t
            for u in outs:
                co[x[u]] += 1
            for u in ins:
                ci[x[u]] += 1
            return any(co[i] < lows[i] or ci[i] > highs[i] for i in range(t))

        events.append(BadEvent("degree_out_of_range", v, tuple(sorted(set(outs) | set(ins))), bad))
    if t > 1:
        # necessary for phase 3: enough out-neighbours in the next part
        for v in verts:
            outs = D.out_adj[v]

            def short(x, v=v, outs=outs):
                nxt = (x[v] + 1) % t
                return sum(1 for u in outs if x[u] == nxt) < k

            events.append(BadEvent("out_degree_low", v, tuple(sorted(set(outs) | {v})), short))
    res1 = mt_resample(n, events, cfg, sampler=_categorical(probs.floats), label="partition")
    colour = res1.assignment
    parts = tuple(frozenset(v for v in verts if colour[v] == i) for i in range(t))
    problems = []
    for v in verts:
        co = [0] * t
        ci = [0] * t
        for u in D.out_adj[v]:
            co[colour[u]] += 1
        for u in D.in_adj[v]:
            ci[colour[u]] += 1
        if any(co[i] < lows[i] or ci[i] > highs[i] for i in range(t)):
            problems.append(f"vertex {v}: class degrees out {co}, in {ci} outside the bounds")
            break
    if problems:
        raise VerificationFailed("phase 1 failed its own check", problems)

    # phase 2: arcs between consecutive parts only
    rows = [[u for u in D.out_adj[v] if colour[u] == (colour[v] + 1) % t] for v in range(n)]
    D2 = D.with_out_adj(rows)

    # phase 3: a unique in-arc for every vertex outside V_1
    choosers = [w for w in verts if colour[w] != 0 and D2.in_adj[w]]
    slot = {w: i for i, w in enumerate(choosers)}
    in_lists = [D2.in_adj[w] for w in choosers]

    def pick(rng, idx):
        return [int(rng.integers(len(in_lists[i]))) for i in idx]

    events3: list[BadEvent] = []
    for v in verts:
        fixed = sum(1 for w in D2.out_adj[v] if colour[w] == 0)
        watched = [(slot[w], D2.in_adj[w].index(v)) for w in D2.out_adj[v] if colour[w] != 0]

        def low(x, fixed=fixed, watched=watched):
            return fixed + sum(1 for s, j in watched if x[s] == j) < k

        events3.append(BadEvent("out_degree_low", v, tuple(sorted(s for s, _ in watched)), low))
    res3 = mt_resample(len(choosers), events3, cfg, sampler=pick, label="unique-in-arc")
    keep_in: dict[int, int] = {w: in_lists[slot[w]][res3.assignment[slot[w]]] for w in choosers}
    rows3 = [
        [w for w in D2.out_adj[v] if colour[w] == 0 or keep_in.get(w) == v]
        for v in range(n)
    ]
    out = D.with_out_adj(rows3)
    lp = LayeredPartition(parts)
    problems = lp.violations(out, k)
    if problems:
        raise VerificationFailed("layered partition failed its own check", problems)
    if stats is not None:
        stats.update(
            rounds=res1.rounds + res3.rounds,
            restarts=res1.restarts + res3.restarts,
            phase1_rounds=res1.rounds,
            phase3_rounds=res3.rounds,
        )
    return out, lp


def forest_modulus(F: Pattern | Digraph) -> int:
    """Smallest t >= 2 not dividing the imbalance of the non-groundedness certificate.

    Any t above the imbalance works, in particular |V(F)|; the smallest keeps p_1
    (and hence the degree needed) as large as possible.
    """
    cert = is_grounded_forest(F.graph if isinstance(F, Pattern) else F)
    if cert.grounded:
        raise NotRegularAvoidable("F is a grounded forest", certificate=cert)
    b = abs(cert.imbalance)
    t = 2
    while b % t == 0:
        t += 1
    return t


def regular_avoid(
    D: Digraph,
    F: Pattern | Digraph,
    k: int,
    cfg: ResampleConfig,
    t: int | None = None,
    stats: dict | None = None,
) -> Digraph:
    """F-free subdigraph of a regular host with min out-degree >= k.

    Cycles in F: remove every underlying cycle of F's shortest cycle length.
    Non-grounded forests: layered partition with a modulus the certificate pair
    cannot wrap around. Grounded forests raise NotRegularAvoidable.
    """
    Fg = F.graph if isinstance(F, Pattern) else F
    _require_regular(D)
    local: dict = {}
    girth = shortest_underlying_cycle(Fg)
    if girth is not None:
        local["branch"] = "cycle"
        local["length"] = girth
        out = avoid_short_cycle_regular(D, girth, k, cfg, local)
    else:
        cert = is_grounded_forest(Fg)
        if cert.grounded:
            raise NotRegularAvoidable("F is a grounded forest and so is not regular-avoidable", certificate=cert)
        if t is None:
            t = forest_modulus(Fg)
        elif cert.imbalance % t == 0:
            raise ParameterInfeasible(f"t = {t} divides the certificate imbalance {cert.imbalance}")
        local["branch"] = "forest"
        local["t"] = t
        out, lp = layered_partition(D, t, k, cfg, local)
        local["partition"] = lp.to_json()
    problems = []
    if min_out_degree(out) < k:
        problems.append(f"min out-degree {min_out_degree(out)} below {k}")
    phi = find_pattern(out, Fg)
    if phi is not None:
        problems.append(f"output contains F: {phi}")
    if problems:
        raise VerificationFailed("regular avoidance failed its own check", problems)
    if stats is not None:
        stats.update(local)
    return out
