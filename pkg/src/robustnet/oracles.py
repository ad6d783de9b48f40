"""Slow reference implementations used to cross-check the fast checkers.

These translate each definition literally: enumerate every assignment of
nodes to (first set, second set, neither), or every subset, and test the
quantifier directly. Nothing here is shared with :mod:`robustnet.robustness`.
"""

from __future__ import annotations

from itertools import combinations, product

from .graph import DiGraph


def _outside_count(g: DiGraph, i: int, s: set[int]) -> int:
    return sum(1 for j in range(g.n) if (j, i) in g.edges and j not in s)


def naive_reachable(g: DiGraph, s: set[int], r: int) -> bool:
    return any(_outside_count(g, i, s) >= r for i in s)


def naive_is_r_robust(g: DiGraph, r: int) -> bool:
    for labels in product((0, 1, 2), repeat=g.n):
        s1 = {v for v, lab in enumerate(labels) if lab == 1}
        s2 = {v for v, lab in enumerate(labels) if lab == 2}
        if s1 and s2 and not naive_reachable(g, s1, r) and not naive_reachable(g, s2, r):
            return False
    return True


def naive_max_robustness(g: DiGraph) -> int:
    if g.n < 2:
        return 0
    r = 0
    while r < g.n and naive_is_r_robust(g, r + 1):
        r += 1
    return r


def naive_is_strongly_r_robust(g: DiGraph, r: int) -> bool:
    for labels in product((False, True), repeat=g.n):
        s = {v for v, inside in enumerate(labels) if inside}
        if not s or naive_reachable(g, s, r):
            continue
        rest = set(range(g.n)) - s
        if not any(all((j, i) in g.edges for j in rest) for i in s):
            return False
    return True


def brute_force_connectivity(g: DiGraph) -> int:
    """Smallest vertex set whose removal disconnects the rest; ``n - 1`` if none exists.

    Undirected graphs only.
    """
    nodes = range(g.n)
    for k in range(g.n - 1):
        for cut in combinations(nodes, k):
            rest = [v for v in nodes if v not in cut]
            if not _connected(g, rest):
                return k
    return max(g.n - 1, 0)


def _connected(g: DiGraph, keep: list[int]) -> bool:
    allowed = set(keep)
    seen = {keep[0]}
    stack = [keep[0]]
    while stack:
        u = stack.pop()
        for v in g.out_neighbors(u):
            if v in allowed and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen == allowed
