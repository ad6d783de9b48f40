"""Synchronous W-MSR consensus simulator.

Each normal node drops up to ``f`` neighbor values strictly above its own and
up to ``f`` strictly below, then moves to a convex combination of its own
value and what is left. Faulty nodes transmit whatever their strategy says.
The simulator checks every step that the normal range never widens.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .adversary import AdversaryStrategy
from .graph import DiGraph, check_nodes
from .robustness import is_f_local, non_reachable_pair

log = logging.getLogger(__name__)

SUM_TOL = 1e-12
DEFAULT_TOL = 1e-9
DEFAULT_STALL_WINDOW = 25
DEFAULT_CLAMP = 1e12
MAX_HORIZON = 100_000


class ScenarioError(ValueError):
    pass


class WeightPolicyError(ValueError):
    pass


class InvariantViolation(AssertionError):
    pass


def wmsr_filter(own: float, neighbor_values: Sequence[tuple[int, float]], f: int) -> list[tuple[int, float]]:
    """Drop the extreme neighbor values and return what node ``i`` keeps.

    Among values strictly larger than ``own`` the ``f`` largest are removed
    (all of them if there are fewer than ``f``); likewise for strictly smaller
    values. Values equal to ``own`` are always kept. Ties at the cut are
    broken by removing the lowest node id first. The kept pairs come back in
    their input order.
    """
    if f < 0:
        raise ValueError("f must be >= 0")
    larger = sorted((p for p in neighbor_values if p[1] > own), key=lambda p: (-p[1], p[0]))
    smaller = sorted((p for p in neighbor_values if p[1] < own), key=lambda p: (p[1], p[0]))
    removed = {p[0] for p in larger[:f]} | {p[0] for p in smaller[:f]}
    return [p for p in neighbor_values if p[0] not in removed]


@dataclass
class WeightPolicy:
    """Weights a normal node puts on itself and on the neighbors it kept.

    ``equal`` gives ``1 / (1 + |kept|)`` to everyone used. ``table`` holds raw
    nonnegative weights ``table[i][j]`` (``table[i][i]`` for the self weight)
    that are renormalized over the node itself plus its kept neighbors.
    ``alpha_floor`` is the lower bound every used weight must meet; when
    omitted it is ``1/n``, which equal weights always satisfy.
    """

    kind: str = "equal"
    table: Mapping[int, Mapping[int, float]] | None = None
    alpha_floor: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("equal", "table"):
            raise WeightPolicyError(f"unknown weight policy {self.kind!r}")
        if self.kind == "table" and not self.table:
            raise WeightPolicyError("table policy needs a weight table")
        if self.alpha_floor is not None and not 0 < self.alpha_floor < 1:
            raise WeightPolicyError("alpha_floor must lie in (0, 1)")

    def floor(self, n: int) -> float:
        return self.alpha_floor if self.alpha_floor is not None else 1.0 / n

    def weights(self, i: int, kept: Sequence[int]) -> tuple[float, list[float]]:
        if self.kind == "equal":
            w = 1.0 / (1 + len(kept))
            return w, [w] * len(kept)
        row = self.table.get(i)
        if row is None:
            raise WeightPolicyError(f"weight table has no row for node {i}")
        try:
            raw = [float(row[i])] + [float(row[j]) for j in kept]
        except KeyError as exc:
            raise WeightPolicyError(f"weight table row {i} lacks an entry for node {exc.args[0]}") from None
        total = math.fsum(raw)
        if total <= 0:
            raise WeightPolicyError(f"weights of node {i} sum to {total}")
        return raw[0] / total, [w / total for w in raw[1:]]

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind}
        if self.table is not None:
            d["table"] = {str(i): {str(j): w for j, w in row.items()} for i, row in self.table.items()}
        if self.alpha_floor is not None:
            d["alpha_floor"] = self.alpha_floor
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "WeightPolicy":
        table = d.get("table")
        if table is not None:
            table = {int(i): {int(j): float(w) for j, w in row.items()} for i, row in table.items()}
        return cls(kind=d.get("kind", "equal"), table=table, alpha_floor=d.get("alpha_floor"))


def wmsr_step(
    values: Sequence[float],
    g: DiGraph,
    f: int,
    weights: WeightPolicy,
    malicious: frozenset[int] = frozenset(),
    sent: Mapping[tuple[int, int], float] | None = None,
) -> tuple[list[float], list[int]]:
    """One synchronous W-MSR update of every normal node.

    ``sent[(j, i)]`` is the value faulty node ``j`` showed to ``i``. Faulty
    entries of the returned list are copied unchanged; the simulator replaces
    them. Also returns how many neighbor values each node discarded.

    The combination is computed as ``x_i + sum w_j (x_j - x_i)`` and clipped
    to the range of the values used, so equal inputs give a bit-exact fixed
    point and rounding can never leave the convex hull.
    """
    sent = sent or {}
    floor = weights.floor(g.n) * (1 - 1e-12)
    nxt = list(values)
    removed = [0] * g.n
    for i in g.nodes:
        if i in malicious:
            continue
        own = values[i]
        heard = [(j, sent[(j, i)] if j in malicious else values[j]) for j in sorted(g.in_neighbors(i))]
        kept = wmsr_filter(own, heard, f)
        removed[i] = len(heard) - len(kept)
        w_self, w = weights.weights(i, [j for j, _ in kept])
        if abs(math.fsum([w_self, *w]) - 1.0) > SUM_TOL:
            raise WeightPolicyError(f"weights of node {i} sum to {math.fsum([w_self, *w])!r}, not 1")
        if w_self < floor or any(x < floor for x in w):
            raise WeightPolicyError(f"node {i} uses a weight below alpha_floor={weights.floor(g.n)}")
        used = [own] + [v for _, v in kept]
        x = own + math.fsum(wj * (v - own) for wj, (_, v) in zip(w, kept))
        nxt[i] = min(max(x, min(used)), max(used))
    return nxt, removed


@dataclass
class Scenario:
    """A W-MSR experiment.

    ``topology`` is a single graph or a sequence of graphs used periodically
    (step ``t`` uses ``topology[t % len(topology)]``). ``horizon=None`` picks
    ``10 * n * ceil(ln(Phi0 / tol))`` steps, capped at 100000. Faulty nodes'
    ``initial_values`` entries only matter for strategies that hold or ramp
    from the initial value. ``witness`` is filled in by :func:`necessity_demo`.
    """

    topology: DiGraph | Sequence[DiGraph]
    f: int
    initial_values: Sequence[float]
    malicious: frozenset[int] = frozenset()
    strategy: AdversaryStrategy = field(default_factory=AdversaryStrategy)
    weights: WeightPolicy = field(default_factory=WeightPolicy)
    horizon: int | None = None
    tol: float = DEFAULT_TOL
    stall_window: int = DEFAULT_STALL_WINDOW
    clamp: float = DEFAULT_CLAMP
    witness: tuple[frozenset[int], frozenset[int]] | None = None

    def __post_init__(self) -> None:
        self.malicious = frozenset(self.malicious)
        self.initial_values = [float(v) for v in self.initial_values]

    @property
    def graphs(self) -> list[DiGraph]:
        return [self.topology] if isinstance(self.topology, DiGraph) else list(self.topology)

    @property
    def n(self) -> int:
        return self.graphs[0].n

    def graph_at(self, t: int) -> DiGraph:
        gs = self.graphs
        return gs[t % len(gs)]

    @property
    def normal(self) -> list[int]:
        return [i for i in range(self.n) if i not in self.malicious]

    def validate(self) -> None:
        gs = self.graphs
        if not gs:
            raise ScenarioError("topology is empty")
        if any(h.n != gs[0].n for h in gs):
            raise ScenarioError("all graphs of a time-varying topology must share the node set")
        if self.f < 0:
            raise ScenarioError("f must be >= 0")
        if len(self.initial_values) != self.n:
            raise ScenarioError(f"expected {self.n} initial values, got {len(self.initial_values)}")
        if any(not math.isfinite(v) for v in self.initial_values):
            raise ScenarioError("initial values must be finite")
        check_nodes(gs[0], self.malicious)
        if not self.normal:
            raise ScenarioError("at least one node must be normal")
        for t, h in enumerate(gs):
            if not is_f_local(h, self.malicious, self.f):
                raise ScenarioError(f"malicious set {sorted(self.malicious)} is not {self.f}-local in topology[{t}]")
        if self.tol <= 0 or self.stall_window < 1:
            raise ScenarioError("tol must be positive and stall_window >= 1")

    def default_horizon(self) -> int:
        xs = [self.initial_values[i] for i in self.normal]
        phi0 = max(xs) - min(xs)
        if phi0 < self.tol:
            return 1
        return max(1, min(MAX_HORIZON, 10 * self.n * math.ceil(math.log(phi0 / self.tol))))


class Outcome(str, enum.Enum):
    CONVERGED = "CONVERGED"
    STALLED = "STALLED"
    TIMEOUT = "TIMEOUT"


@dataclass
class Verdict:
    outcome: Outcome
    steps_used: int
    safe: bool
    value: float | None = None

    def to_dict(self) -> dict:
        return {"outcome": self.outcome.value, "value": self.value, "steps_used": self.steps_used, "safe": self.safe}


@dataclass
class Trajectory:
    """Per-step record. ``removed_count[t]`` is what produced ``values[t + 1]``."""

    malicious: frozenset[int]
    values: list[list[float]] = field(default_factory=list)
    removed_count: list[list[int]] = field(default_factory=list)
    M_N: list[float] = field(default_factory=list)
    m_N: list[float] = field(default_factory=list)
    Phi: list[float] = field(default_factory=list)

    def node(self, i: int) -> list[float]:
        return [row[i] for row in self.values]


def simulate(sc: Scenario) -> tuple[Trajectory, Verdict]:
    """Run W-MSR until the normal spread drops below ``tol``, freezes, or the horizon ends.

    STALLED means ``Phi`` stayed exactly equal for ``stall_window`` consecutive
    steps while still at least ``tol``.
    """
    sc.validate()
    horizon = sc.horizon if sc.horizon is not None else sc.default_horizon()
    normal = sc.normal
    adversary = sc.strategy.start(sc.malicious, sc.initial_values, sc.clamp)
    traj = Trajectory(sc.malicious)
    x = list(sc.initial_values)
    unchanged = 0
    t = 0
    while True:
        g = sc.graph_at(t)
        sent, shown = adversary.emit(t, g, x)
        for m, v in shown.items():
            x[m] = v
        traj.values.append(list(x))
        hi = max(x[i] for i in normal)
        lo = min(x[i] for i in normal)
        if t > 0 and (hi > traj.M_N[-1] or lo < traj.m_N[-1]):
            raise InvariantViolation(
                f"normal range widened at step {t}: [{traj.m_N[-1]}, {traj.M_N[-1]}] -> [{lo}, {hi}]"
            )
        traj.M_N.append(hi)
        traj.m_N.append(lo)
        traj.Phi.append(hi - lo)
        if t > 0:
            unchanged = unchanged + 1 if traj.Phi[-1] == traj.Phi[-2] else 0

        if traj.Phi[-1] < sc.tol:
            verdict = Verdict(Outcome.CONVERGED, t, True, (hi + lo) / 2)
            break
        if unchanged >= sc.stall_window:
            verdict = Verdict(Outcome.STALLED, t, True)
            break
        if t >= horizon:
            verdict = Verdict(Outcome.TIMEOUT, t, True)
            break

        x, removed = wmsr_step(x, g, sc.f, sc.weights, sc.malicious, sent)
        traj.removed_count.append(removed)
        t += 1

    lo0, hi0 = traj.m_N[0], traj.M_N[0]
    verdict.safe = all(lo0 <= traj.values[-1][i] <= hi0 for i in normal)
    log.debug("simulate: %s after %d steps", verdict.outcome.value, verdict.steps_used)
    return traj, verdict


def necessity_demo(g: DiGraph, f: int, **scenario_kwargs) -> Scenario | None:
    """Scenario that cannot reach consensus, or None if ``g`` is (f+1)-robust.

    Finds two disjoint sets that are not (f+1)-reachable, puts the one holding
    the smallest node id at 0, the other at 1 and everything else at 0.5,
    with no faulty nodes. Every member of either set sees at most ``f``
    outside values, all strictly on one side, so W-MSR discards them all and
    both sets stay frozen.
    """
    pair = non_reachable_pair(g, f + 1)
    if pair is None:
        return None
    low, high = sorted(pair, key=min)
    init = [0.5] * g.n
    for i in low:
        init[i] = 0.0
    for i in high:
        init[i] = 1.0
    return Scenario(g, f, init, witness=(low, high), **scenario_kwargs)
