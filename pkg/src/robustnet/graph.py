"""Directed influence graphs and the fixed graph families used throughout the package.

An edge ``(j, i)`` means node ``i`` receives values from node ``j``; the
in-neighborhood of ``i`` is therefore the set of nodes that can influence it.
Undirected graphs are stored as symmetric edge sets with ``directed=False``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import networkx as nx

Edge = tuple[int, int]


@dataclass(frozen=True)
class DiGraph:
    """Immutable graph on nodes ``0..n-1``.

    Use :meth:`from_edges` to build one; it symmetrizes the edge set of an
    undirected graph so callers may list each undirected edge once.
    """

    n: int
    edges: frozenset[Edge] = field(default_factory=frozenset)
    directed: bool = False

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"node count must be nonnegative, got {self.n}")
        object.__setattr__(self, "edges", frozenset((int(j), int(i)) for j, i in self.edges))
        for j, i in self.edges:
            if not (0 <= j < self.n and 0 <= i < self.n):
                raise ValueError(f"edge ({j}, {i}) has an endpoint outside 0..{self.n - 1}")
            if j == i:
                raise ValueError(f"self-loop on node {i}")
        if not self.directed:
            for j, i in self.edges:
                if (i, j) not in self.edges:
                    raise ValueError(f"undirected graph is missing reverse edge of ({j}, {i})")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge], directed: bool = False) -> "DiGraph":
        pairs = set()
        for j, i in edges:
            pairs.add((j, i))
            if not directed:
                pairs.add((i, j))
        return cls(n, frozenset(pairs), directed)

    @cached_property
    def _in(self) -> tuple[frozenset[int], ...]:
        ins: list[set[int]] = [set() for _ in range(self.n)]
        for j, i in self.edges:
            ins[i].add(j)
        return tuple(frozenset(s) for s in ins)

    @cached_property
    def _out(self) -> tuple[frozenset[int], ...]:
        outs: list[set[int]] = [set() for _ in range(self.n)]
        for j, i in self.edges:
            outs[j].add(i)
        return tuple(frozenset(s) for s in outs)

    @cached_property
    def in_masks(self) -> tuple[int, ...]:
        """In-neighborhoods as integer bitmasks (bit ``j`` set iff ``j`` influences the node)."""
        return tuple(sum(1 << j for j in s) for s in self._in)

    @property
    def nodes(self) -> range:
        return range(self.n)

    def _check(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for graph with {self.n} nodes")

    def in_neighbors(self, i: int) -> frozenset[int]:
        self._check(i)
        return self._in[i]

    def out_neighbors(self, i: int) -> frozenset[int]:
        self._check(i)
        return self._out[i]

    def in_degree(self, i: int) -> int:
        return len(self.in_neighbors(i))

    def out_degree(self, i: int) -> int:
        return len(self.out_neighbors(i))

    def degree(self, i: int) -> int:
        """In-degree for directed graphs, ordinary degree for undirected ones."""
        return self.in_degree(i)

    def min_degree(self) -> int:
        return min((len(s) for s in self._in), default=0)

    def has_edge(self, j: int, i: int) -> bool:
        return (j, i) in self.edges

    def undirected_edges(self) -> list[Edge]:
        """Each undirected edge once as ``(low, high)``; only meaningful when ``directed`` is false."""
        return sorted((j, i) for j, i in self.edges if j < i)

    def to_networkx(self) -> nx.Graph | nx.DiGraph:
        h = nx.DiGraph() if self.directed else nx.Graph()
        h.add_nodes_from(range(self.n))
        h.add_edges_from(self.edges)
        return h


def check_nodes(g: DiGraph, nodes: Iterable[int]) -> frozenset[int]:
    s = frozenset(int(v) for v in nodes)
    bad = [v for v in s if not 0 <= v < g.n]
    if bad:
        raise ValueError(f"nodes {sorted(bad)} are not in 0..{g.n - 1}")
    return s


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def vertex_connectivity(g: DiGraph) -> int:
    """Size of a minimum vertex cut.

    Complete graphs have no vertex cut and report ``n - 1``; disconnected
    graphs report 0. Directed graphs use strong connectivity.
    """
    if g.n <= 1:
        return 0
    return int(nx.node_connectivity(g.to_networkx()))


# --- families -------------------------------------------------------------


def complete_graph(n: int) -> DiGraph:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return DiGraph.from_edges(n, ((j, i) for j in range(n) for i in range(j + 1, n)))


def star_graph(n: int) -> DiGraph:
    """Node 0 is the center, nodes ``1..n-1`` are leaves."""
    if n < 1:
        raise ValueError("star graph needs n >= 1")
    return DiGraph.from_edges(n, ((0, i) for i in range(1, n)))


def path_graph(n: int) -> DiGraph:
    if n < 1:
        raise ValueError("path graph needs n >= 1")
    return DiGraph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def two_clique_graph(n: int, f: int) -> DiGraph:
    """Two cliques joined so that each node sees at most ``f`` nodes across.

    Nodes ``0..floor(n/2)-1`` form clique A and the rest form clique B.
    The k-th A-node (0-based) is joined to B-nodes ``k, k+1, ..., k+f-1``
    taken modulo ``|B|``. Every A-node ends up with exactly ``f`` B-neighbors
    and every B-node with at most ``f`` A-neighbors (exactly ``f`` for even n).
    Vertex connectivity and minimum degree are both ``floor(n/2) + f - 1``
    for even n, yet the graph is only f-robust.
    """
    if f < 1 or n < 2 * f + 2:
        raise ValueError(f"need f >= 1 and n >= 2f+2, got n={n}, f={f}")
    na = n // 2
    nb = n - na
    edges = [(j, i) for j in range(na) for i in range(j + 1, na)]
    edges += [(na + j, na + i) for j in range(nb) for i in range(j + 1, nb)]
    edges += [(k, na + (k + d) % nb) for k in range(na) for d in range(f)]
    return DiGraph.from_edges(n, edges)


def two_clique_blocks(n: int) -> tuple[frozenset[int], frozenset[int]]:
    na = n // 2
    return frozenset(range(na)), frozenset(range(na, n))


def tight_robust_graph(f: int) -> DiGraph:
    """2f-robust graph on which W-MSR with parameter 2f can fail.

    Layout (8f + 2 nodes): S1 = ``0..2f-1``, S2 = ``2f..6f-1`` split into
    S2a = ``2f..4f-1`` and S2b = ``4f..6f-1``, S3 = ``6f..8f-1``, then
    node ``a = 8f`` and node ``b = 8f + 1``. S1, S2 and S3 are cliques,
    S1 is fully joined to S2a and S3 to S2b (undirected). Node ``a`` has
    directed in-edges from every S1 node and ``b`` from every S3 node.
    """
    if f < 1:
        raise ValueError("f must be >= 1")
    blocks = tight_robust_blocks(f)
    s1, s2, s3 = blocks["S1"], blocks["S2"], blocks["S3"]
    s2a, s2b = blocks["S2a"], blocks["S2b"]
    a, b = blocks["a"], blocks["b"]
    pairs: set[Edge] = set()

    def join(xs: Iterable[int], ys: Iterable[int]) -> None:
        for x in xs:
            for y in ys:
                if x != y:
                    pairs.add((x, y))
                    pairs.add((y, x))

    for clique in (s1, s2, s3):
        join(clique, clique)
    join(s1, s2a)
    join(s3, s2b)
    pairs.update((j, a) for j in s1)
    pairs.update((j, b) for j in s3)
    return DiGraph(8 * f + 2, frozenset(pairs), directed=True)


def tight_robust_blocks(f: int) -> dict[str, "range | int"]:
    """Node-id layout of :func:`tight_robust_graph`."""
    return {
        "S1": range(0, 2 * f),
        "S2": range(2 * f, 6 * f),
        "S2a": range(2 * f, 4 * f),
        "S2b": range(4 * f, 6 * f),
        "S3": range(6 * f, 8 * f),
        "a": 8 * f,
        "b": 8 * f + 1,
    }


def cpa_gap_graph() -> DiGraph:
    """Eight-node graph that is strongly 3-robust but has X(G) <= 2.

    Nodes are labelled 1..8 in the construction and stored as 0..7
    (label ``k`` is node ``k - 1``): a clique on 1..5, node 6 joined to
    2, 3, 4, node 7 joined to 3, 4, 5 and node 8 joined to 3, 4, 6, 7.
    """
    labelled = [(a, b) for a in range(1, 6) for b in range(a + 1, 6)]
    labelled += [(6, k) for k in (2, 3, 4)]
    labelled += [(7, k) for k in (3, 4, 5)]
    labelled += [(8, k) for k in (3, 4, 6, 7)]
    return DiGraph.from_edges(8, ((a - 1, b - 1) for a, b in labelled))


def disjoint_union(*graphs: DiGraph) -> DiGraph:
    offset = 0
    pairs: set[Edge] = set()
    directed = any(h.directed for h in graphs)
    for h in graphs:
        pairs.update((j + offset, i + offset) for j, i in h.edges)
        offset += h.n
    return DiGraph(offset, frozenset(pairs), directed)


def random_graph(n: int, p: float, rng, directed: bool = False) -> DiGraph:
    """Erdos-Renyi style graph drawn from a numpy ``Generator``."""
    if directed:
        pairs = [(j, i) for j in range(n) for i in range(n) if j != i and rng.random() < p]
    else:
        pairs = [(j, i) for j in range(n) for i in range(j + 1, n) if rng.random() < p]
    return DiGraph.from_edges(n, pairs, directed=directed)
