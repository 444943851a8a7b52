"""Moser-Tardos style resampling.

Variables are indexed ``0..n_vars-1``. Every bad event names the variables it
reads; whenever some event holds, the lowest-indexed violated event has its
variables redrawn. Events are listed in scope order, so "lowest index" is the
deterministic selection rule.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import ParameterInfeasible, ResampleBudgetExceeded
from .rng import stream

Sampler = Callable[[object, Sequence[int]], list]


@dataclass(frozen=True)
class ResampleConfig:
    """Knobs shared by every randomized reduction.

    ``override`` skips the arithmetic feasibility gates; results are still
    verified, and reports mark them as non-faithful.
    """

    p: float = 0.5
    d_trim: int = 192
    max_rounds: int = 20000
    restarts: int = 5
    seed: int = 0
    profile: str = "desk"
    override: bool = False

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ParameterInfeasible(f"p must lie in (0, 1], got {self.p}")
        if self.max_rounds < 1 or self.restarts < 1:
            raise ParameterInfeasible("max_rounds and restarts must be at least 1")
        if self.d_trim < 0:
            raise ParameterInfeasible("d_trim must be non-negative")
        if self.profile not in ("desk", "paper_faithful"):
            raise ParameterInfeasible(f"unknown profile {self.profile!r}")

    def replace(self, **changes) -> "ResampleConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class BadEvent:
    kind: str
    scope: object
    variable_set: tuple[int, ...]
    holds: Callable[[list], bool] = field(compare=False, repr=False)


def all_present(kind: str, scope, variables: Sequence[int]) -> BadEvent:
    """Holds when every listed indicator is set (e.g. a cycle fully survives)."""
    vs = tuple(variables)
    return BadEvent(kind, scope, vs, lambda x: all(x[i] for i in vs))


def count_outside(kind: str, scope, variables: Sequence[int], low: float, high: float = float("inf")) -> BadEvent:
    """Holds when the number of set indicators is < low or > high."""
    vs = tuple(variables)

    def holds(x):
        c = sum(1 for i in vs if x[i])
        return c < low or c > high

    return BadEvent(kind, scope, vs, holds)


def bernoulli(p: float) -> Sampler:
    def draw(rng, idx):
        return (rng.random(len(idx)) < p).tolist()

    return draw


@dataclass
class ResampleResult:
    assignment: list
    rounds: int
    restarts: int
    transcript: list[int]


def mt_resample(
    n_vars: int,
    events: Sequence[BadEvent],
    cfg: ResampleConfig,
    p: float | None = None,
    sampler: Sampler | None = None,
    label: str = "mt",
) -> ResampleResult:
    """Draw all variables, then resample violated events until none holds.

    Raises :class:`ResampleBudgetExceeded` after ``cfg.restarts`` fresh starts
    of at most ``cfg.max_rounds`` resampling steps each.
    """
    if sampler is None:
        sampler = bernoulli(cfg.p if p is None else p)
    var_events: list[list[int]] = [[] for _ in range(n_vars)]
    for ei, ev in enumerate(events):
        for v in ev.variable_set:
            if not (0 <= v < n_vars):
                raise ValueError(f"event {ei} reads unregistered variable {v}")
            var_events[v].append(ei)
    all_idx = list(range(n_vars))
    transcript: list[int] = []
    total_rounds = 0
    x: list = []
    for restart in range(cfg.restarts):
        rng = stream(cfg.seed, label, restart)
        x = sampler(rng, all_idx) if n_vars else []
        heap = [i for i, ev in enumerate(events) if ev.holds(x)]
        queued = set(heap)
        heapq.heapify(heap)
        rounds = 0
        while heap and rounds < cfg.max_rounds:
            i = heapq.heappop(heap)
            queued.discard(i)
            ev = events[i]
            if not ev.holds(x):
                continue
            vs = ev.variable_set
            for v, val in zip(vs, sampler(rng, vs)):
                x[v] = val
            rounds += 1
            transcript.append(i)
            touched = {i}
            for v in vs:
                touched.update(var_events[v])
            for j in touched:
                if j not in queued and events[j].holds(x):
                    queued.add(j)
                    heapq.heappush(heap, j)
        total_rounds += rounds
        if not any(events[j].holds(x) for j in queued):
            return ResampleResult(x, total_rounds, restart, transcript)
    surviving = [ev for ev in events if ev.holds(x)]
    raise ResampleBudgetExceeded(
        f"{len(surviving)} bad event(s) still hold after {cfg.restarts} restart(s) of {cfg.max_rounds} rounds",
        surviving=surviving,
        rounds=total_rounds,
        restarts=cfg.restarts,
    )
