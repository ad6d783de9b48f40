"""Exact checkers for reachability, robustness and related topological properties.

Every checker works on all ``2**n`` node subsets at once. For a subset ``S``
the *reach level* is ``max_{i in S} |V_i \\ S|``, the largest number of
outside in-neighbors any member has; ``S`` is r-reachable iff its level is at
least ``r``. A graph is r-robust iff every pair of disjoint nonempty subsets
contains a member of level ``>= r``, so the largest such ``r`` is

    min over nonempty A  of  max(level[A], min over nonempty B ⊆ V\\A of level[B])

The inner minimum over subsets is a standard subset-min (zeta) transform,
giving ``O(n 2**n)`` work instead of enumerating ``3**n`` pairs.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Iterable, Iterator

import numpy as np

from .graph import DiGraph, check_nodes, mask_of, vertex_connectivity

ENV_LIMIT = "ROBUSTNET_MAX_EXHAUSTIVE_N"
DEFAULT_LIMIT = 20
_BIG = np.int16(np.iinfo(np.int16).max)


class SizeLimitError(ValueError):
    """Raised when an exhaustive check is requested on a graph that is too large."""


def max_exhaustive_n() -> int:
    raw = os.environ.get(ENV_LIMIT)
    if raw is None:
        return DEFAULT_LIMIT
    try:
        return int(raw)
    except ValueError:
        raise SizeLimitError(f"{ENV_LIMIT} must be an integer, got {raw!r}") from None


def _guard(g: DiGraph) -> None:
    limit = max_exhaustive_n()
    if g.n > limit:
        raise SizeLimitError(
            f"exhaustive check refused for n={g.n} (limit {limit}; set {ENV_LIMIT} to raise it)"
        )
    if g.n > 30:
        raise SizeLimitError("subset tables are indexed by 32-bit masks; n must be <= 30")


def _subset_tables(g: DiGraph) -> tuple[np.ndarray, np.ndarray]:
    """Reach level and 'covered' flag for every subset mask.

    ``covered[S]`` is true when some member of S has every node outside S as
    an in-neighbor (the escape clause of strong robustness).
    """
    n = g.n
    full = np.uint32((1 << n) - 1)
    masks = np.arange(1 << n, dtype=np.uint32)
    outside = masks ^ full
    level = np.zeros(1 << n, dtype=np.int16)
    covered = np.zeros(1 << n, dtype=bool)
    for i, inm in enumerate(g.in_masks):
        member = ((masks >> np.uint32(i)) & np.uint32(1)).astype(bool)
        hits = outside & np.uint32(inm)
        np.maximum(level, np.where(member, np.bitwise_count(hits), 0).astype(np.int16), out=level)
        covered |= member & (hits == outside)
    return level, covered


def _subset_min(values: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """For each mask, the minimum of ``values`` over its nonempty submasks and a submask attaining it."""
    best = values.copy()
    best[0] = _BIG
    arg = np.arange(1 << n, dtype=np.uint32)
    for b in range(n):
        vb = best.reshape(-1, 2, 1 << b)
        ab = arg.reshape(-1, 2, 1 << b)
        better = vb[:, 0, :] < vb[:, 1, :]
        vb[:, 1, :] = np.where(better, vb[:, 0, :], vb[:, 1, :])
        ab[:, 1, :] = np.where(better, ab[:, 0, :], ab[:, 1, :])
    return best, arg


def _pair_scores(g: DiGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per nonempty proper subset A: max(level[A], best level inside the complement of A)."""
    level, _ = _subset_tables(g)
    best, arg = _subset_min(level, g.n)
    full = (1 << g.n) - 1
    masks = np.arange(1 << g.n, dtype=np.uint32)
    comp = masks ^ np.uint32(full)
    score = np.maximum(level, best[comp])
    score[0] = _BIG
    score[full] = _BIG
    return score, level, arg[comp]


def is_r_reachable(g: DiGraph, s: Iterable[int], r: int) -> bool:
    """True iff some member of ``s`` has at least ``r`` in-neighbors outside ``s``."""
    s = check_nodes(g, s)
    if not s:
        raise ValueError("reachability is defined for nonempty sets only")
    if r < 1:
        raise ValueError("r must be >= 1")
    return any(len(g.in_neighbors(i) - s) >= r for i in s)


def max_robustness(g: DiGraph) -> int:
    """Largest r for which ``g`` is r-robust; 0 if it is not even 1-robust.

    Graphs with fewer than two nodes have no pair of disjoint nonempty
    subsets, so the definition is vacuous; they report 0 by convention.
    """
    _guard(g)
    if g.n < 2:
        return 0
    score, _, _ = _pair_scores(g)
    return int(score.min())


def is_r_robust(g: DiGraph, r: int) -> bool:
    if r < 1:
        raise ValueError("r must be >= 1")
    _guard(g)
    if g.n < 2:
        return True
    return max_robustness(g) >= r


def non_reachable_pair(g: DiGraph, r: int) -> tuple[frozenset[int], frozenset[int]] | None:
    """Two disjoint nonempty sets, neither r-reachable, or None if ``g`` is r-robust.

    Among all witnesses the one whose first set has the smallest mask is
    returned, so the result is deterministic.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    _guard(g)
    if g.n < 2:
        return None
    score, _, partner = _pair_scores(g)
    hits = np.flatnonzero(score < r)
    if hits.size == 0:
        return None
    a = int(hits[0])
    b = int(partner[a])
    return _members(a, g.n), _members(b, g.n)


def max_strong_robustness(g: DiGraph) -> int:
    """Largest r for which ``g`` is strongly r-robust.

    If every nonempty subset has a member adjacent to everything outside it
    (complete graphs, for instance) the graph is strongly r-robust for every
    r; this saturates at ``n``.
    """
    _guard(g)
    if g.n == 0:
        return 0
    level, covered = _subset_tables(g)
    open_sets = ~covered
    open_sets[0] = False
    if not open_sets.any():
        return g.n
    return int(level[open_sets].min())


def is_strongly_r_robust(g: DiGraph, r: int) -> bool:
    if r < 1:
        raise ValueError("r must be >= 1")
    _guard(g)
    if g.n == 0:
        return True
    level, covered = _subset_tables(g)
    ok = covered | (level >= r)
    return bool(ok[1:].all())


def is_f_local(g: DiGraph, s: Iterable[int], f: int) -> bool:
    """True iff no node outside ``s`` has more than ``f`` in-neighbors inside ``s``."""
    if f < 0:
        raise ValueError("f must be >= 0")
    s = check_nodes(g, s)
    return all(len(g.in_neighbors(i) & s) <= f for i in g.nodes if i not in s)


def has_spanning_tree(g: DiGraph) -> bool:
    """True iff some node reaches every other node along edge direction."""
    if g.n == 0:
        return False
    return any(_reaches_all(g, root) for root in g.nodes)


def _reaches_all(g: DiGraph, root: int) -> bool:
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for v in g.out_neighbors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == g.n


def f_local_sets(g: DiGraph, f: int, include_empty: bool = True, exclude: Iterable[int] = ()) -> Iterator[frozenset[int]]:
    """Every f-local node set that leaves at least one normal node, by size then lexicographically.

    Nodes in ``exclude`` never appear (used to keep a broadcast source normal).
    """
    _guard(g)
    banned = set(exclude)
    pool = [v for v in g.nodes if v not in banned]
    for k in range(0 if include_empty else 1, min(len(pool), g.n - 1) + 1):
        for combo in combinations(pool, k):
            s = frozenset(combo)
            if is_f_local(g, s, f):
                yield s


def _members(mask: int, n: int) -> frozenset[int]:
    return frozenset(i for i in range(n) if mask >> i & 1)


@dataclass
class RobustnessReport:
    n: int
    max_robust_r: int | None
    max_strong_robust_r: int | None
    connectivity: int | None
    min_degree: int
    errors: dict[str, str]

    def to_dict(self) -> dict:
        return asdict(self)


def analyze(g: DiGraph) -> RobustnessReport:
    """Compute every metric that fits the size guard; failures are recorded per metric."""
    errors: dict[str, str] = {}

    def attempt(name, fn):
        try:
            return fn(g)
        except (SizeLimitError, ValueError) as exc:
            errors[name] = str(exc)
            return None

    return RobustnessReport(
        n=g.n,
        max_robust_r=attempt("max_robust_r", max_robustness),
        max_strong_robust_r=attempt("max_strong_robust_r", max_strong_robustness),
        connectivity=attempt("connectivity", vertex_connectivity),
        min_degree=g.min_degree(),
        errors=errors,
    )


__all__ = [
    "SizeLimitError",
    "RobustnessReport",
    "analyze",
    "f_local_sets",
    "has_spanning_tree",
    "is_f_local",
    "is_r_reachable",
    "is_r_robust",
    "is_strongly_r_robust",
    "mask_of",
    "max_exhaustive_n",
    "max_robustness",
    "max_strong_robustness",
    "non_reachable_pair",
]
