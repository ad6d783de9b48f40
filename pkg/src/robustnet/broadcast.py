"""Certified Propagation Algorithm (CPA) and the X(G) sufficiency metric.

Rounds are synchronous. The source commits in round 0 and its direct
out-neighbors accept in round 1. After that a normal node accepts a value once
it has heard that same value from at least ``f + 1`` distinct in-neighbors,
counted over all rounds so far with each sender counted once per value.
Committed nodes resend their value every round.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable

import numpy as np

from .graph import DiGraph, check_nodes
from .robustness import f_local_sets, is_f_local, is_strongly_r_robust

FAKE = "FAKE"


@dataclass
class LieStrategy:
    """What faulty nodes send during CPA.

    ``lie``: every faulty node sends ``fake`` every round (a coordinated lie,
    the strongest attack on both safety and liveness since it never relays
    the true value). ``silent``: send nothing. ``random``: a fresh token from
    ``pool`` each round. With ``byzantine=True`` each receiver gets its own
    token (``lie`` appends the receiver id; ``random`` draws per receiver).
    """

    kind: str = "lie"
    byzantine: bool = False
    fake: Hashable = FAKE
    pool: int = 3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("lie", "silent", "random"):
            raise ValueError(f"unknown CPA strategy {self.kind!r}")

    def messages(self, rnd: int, sender: int, receivers: list[int], rng) -> dict[int, Hashable]:
        if self.kind == "silent":
            return {}
        if self.kind == "lie":
            if self.byzantine:
                return {i: f"{self.fake}-{i}" for i in receivers}
            return {i: self.fake for i in receivers}
        if self.byzantine:
            return {i: f"{self.fake}-{int(rng.integers(self.pool))}" for i in receivers}
        token = f"{self.fake}-{int(rng.integers(self.pool))}"
        return {i: token for i in receivers}


@dataclass
class CPAResult:
    source: int
    true_value: Hashable
    normal: frozenset[int]
    committed: dict[int, Hashable]
    rounds: int
    log: list[tuple[int, int, Hashable]] = field(default_factory=list)

    @property
    def accepted(self) -> frozenset[int]:
        """Normal nodes (source included) that accepted the true value."""
        return frozenset(i for i, v in self.committed.items() if v == self.true_value)

    @property
    def wrong(self) -> dict[int, Hashable]:
        return {i: v for i, v in self.committed.items() if v != self.true_value}

    @property
    def success(self) -> bool:
        return self.accepted == self.normal and not self.wrong


def cpa_run(
    g: DiGraph,
    source: int,
    f: int,
    malicious: Iterable[int] = (),
    strategy: LieStrategy | None = None,
    true_value: Hashable = 1,
) -> CPAResult:
    malicious = check_nodes(g, malicious)
    g._check(source)
    if source in malicious:
        raise ValueError("the source must be normal")
    if not is_f_local(g, malicious, f):
        raise ValueError(f"malicious set {sorted(malicious)} is not {f}-local")
    strategy = strategy or LieStrategy()
    rng = np.random.default_rng(strategy.seed)
    normal = frozenset(v for v in g.nodes if v not in malicious)

    committed: dict[int, Hashable] = {source: true_value}
    heard: dict[int, defaultdict[Hashable, set[int]]] = {i: defaultdict(set) for i in g.nodes}
    log = [(0, source, true_value)]
    last = 0
    rnd = 0
    while True:
        rnd += 1
        # messages sent at the end of round rnd - 1 arrive now
        direct: dict[int, Hashable] = {}
        for j in sorted(committed):
            for i in g.out_neighbors(j):
                heard[i][committed[j]].add(j)
                if j == source:
                    direct[i] = committed[j]
        for m in sorted(malicious):
            for i, v in strategy.messages(rnd, m, sorted(g.out_neighbors(m)), rng).items():
                heard[i][v].add(m)

        new: dict[int, Hashable] = {}
        for i in sorted(normal - committed.keys()):
            if i in direct:
                new[i] = direct[i]
                continue
            ready = [v for v, senders in heard[i].items() if len(senders) >= f + 1]
            if ready:
                new[i] = min(ready, key=lambda v: (-len(heard[i][v]), repr(v)))
        if not new:
            break
        committed.update(new)
        log.extend((rnd, i, v) for i, v in sorted(new.items()))
        last = rnd
    return CPAResult(source, true_value, normal, committed, last, log)


def _distances(g: DiGraph, s: int) -> list[float]:
    dist = [math.inf] * g.n
    dist[s] = 0
    frontier = [s]
    while frontier:
        nxt = []
        for u in frontier:
            for v in g.out_neighbors(u):
                if dist[v] == math.inf:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def _require_undirected_connected(g: DiGraph) -> None:
    if g.directed:
        raise ValueError("X(G) is defined for undirected graphs")
    if g.n and math.inf in _distances(g, 0):
        raise ValueError("X(G) needs a connected graph")


def x_metric(g: DiGraph, v: int, s: int) -> int:
    """Number of neighbors of ``v`` strictly closer (in hops) to ``s`` than ``v`` is."""
    _require_undirected_connected(g)
    dist = _distances(g, s)
    return sum(1 for u in g.in_neighbors(v) if dist[u] < dist[v])


def x_graph_witness(g: DiGraph) -> tuple[float, int | None, int | None]:
    """``(X(G), v, s)`` minimizing over distinct non-adjacent ordered pairs; ``(inf, None, None)`` if none exist."""
    _require_undirected_connected(g)
    best: tuple[float, int | None, int | None] = (math.inf, None, None)
    for s in g.nodes:
        dist = _distances(g, s)
        for v in g.nodes:
            if v == s or g.has_edge(v, s):
                continue
            x = sum(1 for u in g.in_neighbors(v) if dist[u] < dist[v])
            if x < best[0]:
                best = (x, v, s)
    return best


def x_graph(g: DiGraph) -> float:
    """X(G), or ``math.inf`` for graphs without a non-adjacent pair (complete graphs)."""
    return x_graph_witness(g)[0]


@dataclass
class SufficiencyReport:
    f: int
    x_graph: float
    x_condition: bool
    strongly_robust: bool

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "x_graph": "inf" if self.x_graph == math.inf else int(self.x_graph),
            "x_condition": self.x_condition,
            "strongly_robust": self.strongly_robust,
        }


def cpa_sufficiency_report(g: DiGraph, f: int) -> SufficiencyReport:
    """Which of the two sufficient conditions for CPA hold: ``X(G) > 2f`` and strong (2f+1)-robustness."""
    x = x_graph(g)
    return SufficiencyReport(f, x, x > 2 * f, is_strongly_r_robust(g, 2 * f + 1))


@dataclass
class SweepResult:
    runs: int
    failures: list[tuple[int, frozenset[int], str]]
    unsound: list[tuple[int, frozenset[int], str]]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.unsound


def cpa_sweep(
    g: DiGraph,
    f: int,
    sources: Iterable[int] | None = None,
    strategies: Iterable[LieStrategy] | None = None,
) -> SweepResult:
    """Run CPA for every source and every f-local malicious set that spares it."""
    strategies = list(strategies) if strategies is not None else default_lies()
    srcs = list(g.nodes) if sources is None else list(sources)
    runs = 0
    failures, unsound = [], []
    for s in srcs:
        for bad in f_local_sets(g, f, exclude=[s]):
            for strat in strategies:
                res = cpa_run(g, s, f, bad, strat)
                runs += 1
                label = f"{strat.kind}{'/byzantine' if strat.byzantine else ''}"
                if res.wrong:
                    unsound.append((s, bad, label))
                if res.accepted != res.normal:
                    failures.append((s, bad, label))
    return SweepResult(runs, failures, unsound)


def default_lies() -> list[LieStrategy]:
    return [
        LieStrategy("lie"),
        LieStrategy("silent"),
        LieStrategy("random", byzantine=True, seed=7),
    ]
