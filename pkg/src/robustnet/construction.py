"""Growing r-robust graphs one node at a time.

Adding a node with at least ``r`` in-neighbors to an r-robust graph keeps it
r-robust, so any sequence of such additions starting from an r-robust seed
(for example ``K_{2r-1}``) stays r-robust. Which existing nodes get chosen is
free; the modes here pick them uniformly, by preferential attachment, or from
an explicit list.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .graph import DiGraph, check_nodes, complete_graph

MODES = ("uniform", "preferential", "explicit")


def add_node(g: DiGraph, neighbors: Iterable[int], directed: bool | None = None) -> DiGraph:
    """Return a copy of ``g`` with one extra node joined to ``neighbors``.

    The new node gets id ``g.n``. For undirected graphs the joins are
    undirected; for directed graphs (or ``directed=True``) the new node only
    receives in-edges from ``neighbors``.
    """
    nbrs = check_nodes(g, neighbors)
    if not nbrs:
        raise ValueError("the new node needs at least one neighbor")
    if directed is None:
        directed = g.directed
    new = g.n
    pairs = set(g.edges)
    pairs.update((j, new) for j in nbrs)
    if not directed:
        pairs.update((new, j) for j in nbrs)
    return DiGraph(g.n + 1, frozenset(pairs), g.directed or directed)


@dataclass
class GrowthPolicy:
    r: int
    mode: str = "uniform"
    seed: int = 0
    attachments: Sequence[Sequence[int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"unknown growth mode {self.mode!r}; expected one of {MODES}")


def attachment_weights(g: DiGraph) -> np.ndarray:
    """Preferential-attachment weight of each node: degree, or in+out degree when directed."""
    if g.directed:
        return np.array([g.in_degree(v) + g.out_degree(v) for v in g.nodes], dtype=float)
    return np.array([g.degree(v) for v in g.nodes], dtype=float)


def preferential_pick(g: DiGraph, r: int, rng: np.random.Generator) -> list[int]:
    """Draw ``r`` distinct nodes, each draw proportional to weight among those not yet drawn."""
    weights = attachment_weights(g)
    if np.count_nonzero(weights) < r:
        raise ValueError(f"only {np.count_nonzero(weights)} nodes have positive degree, need {r}")
    chosen: list[int] = []
    for _ in range(r):
        p = weights / weights.sum()
        v = int(rng.choice(g.n, p=p))
        chosen.append(v)
        weights[v] = 0.0
    return sorted(chosen)


def grow_trace(seed_graph: DiGraph, policy: GrowthPolicy, target_n: int) -> Iterator[DiGraph]:
    """Yield the seed graph and then every intermediate graph up to ``target_n`` nodes."""
    if target_n < seed_graph.n:
        raise ValueError(f"target_n={target_n} is smaller than the seed graph ({seed_graph.n} nodes)")
    rng = np.random.default_rng(policy.seed)
    g = seed_graph
    yield g
    step = 0
    while g.n < target_n:
        if policy.r > g.n:
            raise ValueError(f"cannot attach {policy.r} edges in a graph of {g.n} nodes")
        if policy.mode == "uniform":
            nbrs = sorted(int(v) for v in rng.choice(g.n, size=policy.r, replace=False))
        elif policy.mode == "preferential":
            nbrs = preferential_pick(g, policy.r, rng)
        else:
            if step >= len(policy.attachments):
                raise ValueError("explicit growth ran out of attachment lists")
            nbrs = list(policy.attachments[step])
            if len(set(nbrs)) < policy.r:
                raise ValueError(f"attachment list {nbrs} has fewer than r={policy.r} distinct nodes")
        g = add_node(g, nbrs)
        step += 1
        yield g


def grow(seed_graph: DiGraph, policy: GrowthPolicy, target_n: int) -> DiGraph:
    g = seed_graph
    for g in grow_trace(seed_graph, policy, target_n):
        pass
    return g


def recommended_seed(r: int) -> DiGraph:
    """Smallest complete graph that is r-robust: ``K_{2r-1}``."""
    return complete_graph(2 * r - 1)
