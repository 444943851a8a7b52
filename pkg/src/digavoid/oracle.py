"""Exact small-instance oracles and a postcondition verifier.

The search space is pairs (vertex subset, arc subset). A sub-digraph with minimum
out-degree >= k lives inside the k-out-core of whatever arcs remain, so the
branch-and-bound works on arc exclusions only and uses the out-core as bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .digraph import Digraph, min_out_degree, out_core
from .errors import BudgetExceeded, ParameterInfeasible, TooLarge
from .patterns import Pattern, find_pattern, is_embedding, iter_embeddings


@dataclass(frozen=True)
class OracleCaps:
    max_vertices: int = 12
    max_arcs: int = 30
    max_nodes_expanded: int = 10**7

    def __post_init__(self):
        if min(self.max_vertices, self.max_arcs, self.max_nodes_expanded) < 1:
            raise ParameterInfeasible("oracle caps must be positive")


def _pattern_graph(F) -> Digraph:
    g = F.graph if isinstance(F, Pattern) else F
    if g.m == 0:
        raise ParameterInfeasible("pattern must have at least one arc")
    return g


def _check_caps(D: Digraph, caps: OracleCaps) -> None:
    if D.order > caps.max_vertices:
        raise TooLarge(f"{D.order} vertices exceed the oracle cap of {caps.max_vertices}", D.order, caps.max_vertices)
    if D.m > caps.max_arcs:
        raise TooLarge(f"{D.m} arcs exceed the oracle cap of {caps.max_arcs}", D.m, caps.max_arcs)
    if D.order == 0:
        raise ParameterInfeasible("the host digraph has no vertices")


class _Search:
    def __init__(self, D: Digraph, F: Digraph, caps: OracleCaps):
        self.D = D
        self.F = F
        self.F_arcs = F.arc_list()
        self.caps = caps
        self.nodes = 0

    def feasible(self, k: int) -> Digraph | None:
        """Some sub-digraph with min out-degree >= k and no copy of F, or None."""
        return self._branch(k, frozenset(), frozenset())

    def _branch(self, k, excluded: frozenset, committed: frozenset) -> Digraph | None:
        self.nodes += 1
        if self.nodes > self.caps.max_nodes_expanded:
            raise BudgetExceeded(f"expanded more than {self.caps.max_nodes_expanded} nodes")
        G = self.D.spanning(a for a in self.D.arcs if a not in excluded)
        K = out_core(G, k)
        if K.order == 0 or not committed <= K.arcs:
            return None
        copy = self._fewest_open_copy(K, committed)
        if copy is None:
            return K
        if all(a in committed for a in copy):
            return None
        done = set(committed)
        for e in copy:
            if e in done:
                continue
            found = self._branch(k, excluded | {e}, frozenset(done))
            if found is not None:
                return found
            done.add(e)
        return None

    def _fewest_open_copy(self, K: Digraph, committed: frozenset, scan: int = 64):
        best = None
        best_open = None
        for phi in itertools.islice(iter_embeddings(K, self.F), scan):
            arcs = [(phi[x], phi[y]) for x, y in self.F_arcs]
            n_open = sum(1 for a in arcs if a not in committed)
            if best is None or n_open < best_open:
                best, best_open = arcs, n_open
                if n_open <= 1:
                    break
        return best


def max_f_free_min_outdegree(D: Digraph, F: Pattern | Digraph, caps: OracleCaps | None = None) -> tuple[int, Digraph]:
    """Largest k such that some nonempty F-free sub-digraph of D has min out-degree k.

    Returns the value and a witness attaining it. Raises BudgetExceeded rather
    than guess when the node budget runs out.
    """
    caps = caps or OracleCaps()
    Fg = _pattern_graph(F)
    _check_caps(D, caps)
    search = _Search(D, Fg, caps)
    v0 = D.vertex_list()[0]
    best_k, best = 0, Digraph(D.n, [[] for _ in range(D.n)], vertices=[v0])
    k = 1
    while k <= max((len(r) for r in D.out_adj), default=0):
        witness = search.feasible(k)
        if witness is None:
            break
        best_k, best = min_out_degree(witness), witness
        k = best_k + 1
    return best_k, best


def brute_force_max_f_free(D: Digraph, F: Pattern | Digraph) -> int:
    """Reference value by enumerating every arc subset and every vertex subset.

    Containment is decided by trying all injective maps, independently of the
    backtracking search.
    """
    Fg = _pattern_graph(F)
    fv = Fg.vertex_list()
    f_arcs = Fg.arc_list()
    arcs = D.arc_list()
    verts = D.vertex_list()
    best = None
    for r in range(len(arcs) + 1):
        for S in itertools.combinations(arcs, r):
            S_set = set(S)
            ends = {u for a in S for u in a}
            rest = [v for v in verts if v not in ends]
            for extra in range(len(rest) + 1):
                for more in itertools.combinations(rest, extra):
                    W = ends | set(more)
                    if not W:
                        continue
                    outdeg = {w: 0 for w in W}
                    for u, _ in S:
                        outdeg[u] += 1
                    value = min(outdeg.values())
                    if best is not None and value <= best:
                        continue
                    contains = any(
                        all((img[fv.index(x)], img[fv.index(y)]) in S_set for x, y in f_arcs)
                        for img in itertools.permutations(sorted(W), len(fv))
                    )
                    if not contains:
                        best = value
    if best is None:
        raise ParameterInfeasible("no nonempty F-free sub-digraph exists")
    return best


@dataclass
class UnavoidabilityVerdict:
    verdict: str  # unavoidable_witness | avoidable_here | unknown
    k: int
    value: int | None = None
    witness: Digraph | None = None
    reason: str = ""

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "k": self.k, "value": self.value, "reason": self.reason}
        if self.witness is not None:
            out["witness_arcs"] = [list(a) for a in self.witness.arc_list()]
            out["witness_vertices"] = self.witness.vertex_list()
        return out


def check_unavoidable(D: Digraph, F: Pattern | Digraph, k: int, caps: OracleCaps | None = None) -> UnavoidabilityVerdict:
    """Is every sub-digraph of D with min out-degree >= k forced to contain F?"""
    caps = caps or OracleCaps()
    Fg = _pattern_graph(F)
    try:
        _check_caps(D, caps)
        search = _Search(D, Fg, caps)
        witness = search.feasible(k) if k >= 1 else None
    except (BudgetExceeded, TooLarge) as exc:
        return UnavoidabilityVerdict("unknown", k, reason=str(exc))
    if k < 1:
        value, witness = max_f_free_min_outdegree(D, Fg, caps)
        return UnavoidabilityVerdict("avoidable_here", k, value, witness)
    if witness is None:
        return UnavoidabilityVerdict("unavoidable_witness", k, reason=f"no F-free sub-digraph reaches min out-degree {k}")
    return UnavoidabilityVerdict("avoidable_here", k, min_out_degree(witness), witness)


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationSpec:
    k: int = 0
    patterns: tuple[Pattern, ...] = ()
    layered: object = None  # LayeredPartition
    typed: object = None  # TypedPartition

    def __post_init__(self):
        if self.k < 0:
            raise ParameterInfeasible("k must be non-negative")
        for p in self.patterns:
            if not isinstance(p, Pattern):
                raise ParameterInfeasible(f"forbidden pattern {p!r} is not a Pattern")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: object = None

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "witness": self.witness}


@dataclass
class VerificationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"verified": self.passed, "checks": [c.to_json() for c in self.checks]}


def verify(D: Digraph, spec: VerificationSpec) -> VerificationReport:
    report = VerificationReport()
    low = [v for v in D.vertex_list() if len(D.out_adj[v]) < spec.k]
    report.checks.append(
        Check(
            f"min_out_degree>={spec.k}",
            not low,
            f"vertex {low[0]} has out-degree {len(D.out_adj[low[0]])}" if low else f"min out-degree {min_out_degree(D)}",
            low[0] if low else None,
        )
    )
    for p in spec.patterns:
        phi = find_pattern(D, p)
        if phi is not None:
            assert is_embedding(D, p, phi)
        report.checks.append(
            Check(
                f"free_of_{p.name}",
                phi is None,
                "" if phi is None else "embedding found",
                None if phi is None else {str(x): v for x, v in sorted(phi.items())},
            )
        )
    if spec.layered is not None:
        problems = spec.layered.violations(D)
        report.checks.append(Check("layered_partition", not problems, "; ".join(problems)))
    if spec.typed is not None:
        problems = spec.typed.violations(D)
        report.checks.append(Check(f"{spec.typed.s}-typed", not problems, "; ".join(problems[:5])))
    return report


def verify_all(D: Digraph, k: int, patterns: Iterable[Pattern]) -> VerificationReport:
    return verify(D, VerificationSpec(k, tuple(patterns)))
