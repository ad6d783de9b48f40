"""Reproducible checks of every structural claim, and the manifest runner behind ``reproduce``.

Each claim is a function ``(seed) -> (passed, detail)``. :func:`run_claim`
times it and turns exceptions into failures, so one broken claim never hides
the others.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import oracles
from .adversary import AdversaryStrategy, battery
from .broadcast import LieStrategy, cpa_sweep, x_graph, x_graph_witness, x_metric
from .consensus import Outcome, Scenario, simulate, necessity_demo
from .construction import GrowthPolicy, attachment_weights, grow, grow_trace
from .graph import (
    DiGraph,
    complete_graph,
    cpa_gap_graph,
    random_graph,
    tight_robust_blocks,
    tight_robust_graph,
    two_clique_blocks,
    two_clique_graph,
    vertex_connectivity,
)
from .robustness import (
    f_local_sets,
    has_spanning_tree,
    is_f_local,
    is_r_reachable,
    is_r_robust,
    is_strongly_r_robust,
    max_robustness,
)

log = logging.getLogger(__name__)

ClaimFn = Callable[[int], tuple[bool, str]]
CLAIMS: dict[str, tuple[ClaimFn, float | None]] = {}


def claim(name: str, limit: float | None = None):
    def register(fn: ClaimFn) -> ClaimFn:
        CLAIMS[name] = (fn, limit)
        return fn

    return register


@dataclass
class ClaimResult:
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float | None = None

    def line(self) -> str:
        budget = f" (limit {self.limit:g}s)" if self.limit else ""
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} [{self.seconds:.2f}s{budget}] {self.detail}"


def run_claim(name: str, seed: int = 0) -> ClaimResult:
    if name not in CLAIMS:
        return ClaimResult(name, False, f"unknown claim {name!r}", 0.0)
    fn, limit = CLAIMS[name]
    start = time.perf_counter()
    try:
        passed, detail = fn(seed)
    except Exception as exc:  # reported per claim
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if passed and limit is not None and elapsed > limit:
        passed, detail = False, f"{detail}; exceeded time limit"
    return ClaimResult(name, passed, detail, elapsed, limit)


# --- consensus claims ---------------------------------------------------------


@claim("two-clique-stall", limit=5)
def two_clique_stall(seed: int = 0) -> tuple[bool, str]:
    """High connectivity and degree, yet only 1-robust, and W-MSR freezes."""
    n, f = 10, 1
    g = two_clique_graph(n, f)
    a, _ = two_clique_blocks(n)
    kappa, dmin, rob = vertex_connectivity(g), g.min_degree(), max_robustness(g)
    init = [0.0 if i in a else 1.0 for i in range(n)]
    traj, verdict = simulate(Scenario(g, f, init))
    frozen = all(p == 1.0 for p in traj.Phi)
    ok = kappa == n // 2 + f - 1 and dmin == n // 2 + f - 1 and rob == 1
    ok = ok and verdict.outcome is Outcome.STALLED and frozen
    return ok, f"kappa={kappa} min_degree={dmin} max_robust_r={rob} verdict={verdict.outcome.value} Phi==1:{frozen}"


def _sufficiency_graphs() -> list[tuple[str, DiGraph]]:
    grown = grow(complete_graph(5), GrowthPolicy(r=3, mode="uniform", seed=0), 10)
    return [("K5", complete_graph(5)), ("K7", complete_graph(7)), ("grow(K5,r=3,n=10)", grown)]


@claim("sufficiency-sweep", limit=120)
def sufficiency_sweep(seed: int = 0) -> tuple[bool, str]:
    """Every 1-local attack on a 3-robust graph still ends in safe consensus."""
    rng = np.random.default_rng(seed)
    f = 1
    runs, bad = 0, []
    for name, g in _sufficiency_graphs():
        if not is_r_robust(g, 2 * f + 1):
            return False, f"{name} is not {2 * f + 1}-robust"
        vectors = [rng.uniform(0.0, 1.0, g.n).tolist() for _ in range(3)]
        for mal in f_local_sets(g, f):
            for strat in battery():
                for init in vectors:
                    _, v = simulate(Scenario(g, f, init, mal, strat, tol=1e-9))
                    runs += 1
                    if v.outcome is not Outcome.CONVERGED or not v.safe:
                        bad.append((name, sorted(mal), strat.kind, strat.model, v.outcome.value))
    return not bad, f"{runs} runs, {len(bad)} not converged/safe" + (f": {bad[:3]}" if bad else "")


@claim("tight-graph-stall", limit=5)
def tight_graph_stall(seed: int = 0) -> tuple[bool, str]:
    """A 2-robust graph where two 1-local liars freeze nodes a and b forever."""
    f = 1
    g = tight_robust_graph(f)
    blocks = tight_robust_blocks(f)
    rob = max_robustness(g)
    bad_low, bad_high = blocks["S1"][0], blocks["S3"][0]
    a, b = blocks["a"], blocks["b"]
    init = [0.5] * g.n
    init[bad_low] = init[a] = 0.0
    init[bad_high] = init[b] = 1.0
    sc = Scenario(g, f, init, {bad_low, bad_high}, AdversaryStrategy("constant"), horizon=1000, stall_window=1000)
    traj, verdict = simulate(sc)
    steps = len(traj.values) - 1
    a_fixed = all(v == 0.0 for v in traj.node(a))
    b_fixed = all(v == 1.0 for v in traj.node(b))
    ok = rob == 2 * f and verdict.outcome is Outcome.STALLED and steps >= 1000 and a_fixed and b_fixed
    return ok, f"max_robust_r={rob} verdict={verdict.outcome.value} steps={steps} a fixed:{a_fixed} b fixed:{b_fixed}"


@claim("necessity-witness")
def necessity_witness(seed: int = 0) -> tuple[bool, str]:
    """A graph that is not (f+1)-robust yields a frozen witness; K5 yields none."""
    sc = necessity_demo(two_clique_graph(10, 1), 1)
    if sc is None:
        return False, "no witness on the two-clique graph"
    _, verdict = simulate(sc)
    expected = set(two_clique_blocks(10))
    none_on_k5 = necessity_demo(complete_graph(5), 1) is None
    ok = verdict.outcome is Outcome.STALLED and set(sc.witness) == expected and none_on_k5
    witness = [sorted(s) for s in sc.witness]
    return ok, f"witness={witness} verdict={verdict.outcome.value} K5 none:{none_on_k5}"


def _random_f_local(g: DiGraph, f: int, rng: np.random.Generator) -> frozenset[int]:
    target = int(rng.integers(0, f + 2))
    chosen: set[int] = set()
    for v in rng.permutation(g.n):
        if len(chosen) >= min(target, g.n - 1):
            break
        if is_f_local(g, chosen | {int(v)}, f):
            chosen.add(int(v))
    return frozenset(chosen)


def _random_strategy(rng: np.random.Generator) -> AdversaryStrategy:
    kind = ["constant", "ramp", "random", "split", "random"][int(rng.integers(5))]
    model = "byzantine" if kind == "split" or (kind == "random" and rng.random() < 0.5) else "malicious"
    s = int(rng.integers(1 << 30))
    lo, hi = sorted(rng.uniform(-100, 100, 2).tolist())
    return AdversaryStrategy(kind, model, value=float(rng.uniform(-100, 100)), slope=float(rng.uniform(-3, 3)), low=lo, high=hi, seed=s)


@claim("safety-invariant", limit=120)
def safety_invariant(seed: int = 0) -> tuple[bool, str]:
    """Normal range never widens and converged values stay in the initial normal range."""
    rng = np.random.default_rng(seed)
    outcomes = {o.value: 0 for o in Outcome}
    problems = []
    for k in range(500):
        n = int(rng.integers(3, 13))
        g = random_graph(n, float(rng.uniform(0.3, 0.95)), rng, directed=bool(rng.random() < 0.4))
        f = int(rng.integers(0, 3))
        mal = _random_f_local(g, f, rng)
        init = rng.uniform(-1.0, 1.0, n).tolist()
        traj, v = simulate(Scenario(g, f, init, mal, _random_strategy(rng), horizon=300))
        outcomes[v.outcome.value] += 1
        normal = [i for i in range(n) if i not in mal]
        for t in range(1, len(traj.values)):
            prev = [traj.values[t - 1][i] for i in normal]
            cur = [traj.values[t][i] for i in normal]
            if max(cur) > max(prev) or min(cur) < min(prev):
                problems.append((k, t))
                break
        if v.outcome is Outcome.CONVERGED:
            lo, hi = traj.m_N[0], traj.M_N[0]
            if not lo - 1e-9 <= v.value <= hi + 1e-9:
                problems.append((k, "value"))
    return not problems, f"500 scenarios {outcomes}, {len(problems)} violations"


# --- robustness claims --------------------------------------------------------


def _random_small_graph(rng: np.random.Generator, n_max: int = 10, n_min: int = 2) -> DiGraph:
    n = int(rng.integers(n_min, n_max + 1))
    return random_graph(n, float(rng.uniform(0.1, 1.0)), rng, directed=bool(rng.random() < 0.5))


def _monotone(flags: list[bool]) -> bool:
    """True-for-r implies true for every smaller r: the list never goes False then True."""
    return all(not (later and not earlier) for earlier, later in zip(flags, flags[1:]))


def _remove_in_edges(g: DiGraph, k: int, rng: np.random.Generator) -> DiGraph:
    keep = set(g.edges)
    for i in g.nodes:
        ins = sorted(g.in_neighbors(i))
        drop = int(rng.integers(0, k + 1))
        for j in rng.permutation(ins)[:drop]:
            keep.discard((int(j), i))
    return DiGraph(g.n, frozenset(keep), directed=True)


@claim("reachability-properties")
def reachability_properties(seed: int = 0) -> tuple[bool, str]:
    """Reachability and both robustness notions are monotone in r; dropping K < r in-edges leaves (r-K)-robust."""
    rng = np.random.default_rng(seed)
    bad = []
    for k in range(200):
        g = _random_small_graph(rng)
        rs = range(1, g.n + 1)
        if not _monotone([is_r_robust(g, r) for r in rs]):
            bad.append((k, "robust"))
        if not _monotone([is_strongly_r_robust(g, r) for r in rs]):
            bad.append((k, "strong"))
        for _ in range(5):
            s = {int(v) for v in np.flatnonzero(rng.random(g.n) < 0.5)} or {0}
            if not _monotone([is_r_reachable(g, s, r) for r in rs]):
                bad.append((k, "reachable"))
    trials = 0
    while trials < 100:
        g = random_graph(int(rng.integers(4, 11)), float(rng.uniform(0.6, 1.0)), rng)
        r = max_robustness(g)
        if r < 2:
            continue
        trials += 1
        kk = int(rng.integers(1, r))
        h = _remove_in_edges(g, kk, rng)
        if not is_r_robust(h, r - kk):
            bad.append(("degrade", trials))
    return not bad, f"200 graphs + 100 edge-removal trials, {len(bad)} violations" + (f": {bad[:3]}" if bad else "")


@claim("spanning-tree")
def spanning_tree(seed: int = 0) -> tuple[bool, str]:
    """Every 1-robust graph has a spanning tree."""
    rng = np.random.default_rng(seed)
    robust = bad = 0
    for _ in range(200):
        g = _random_small_graph(rng)
        if is_r_robust(g, 1):
            robust += 1
            bad += not has_spanning_tree(g)
    return bad == 0 and robust > 0, f"{robust} of 200 graphs 1-robust, {bad} without spanning tree"


@claim("oracle-equivalence")
def oracle_equivalence(seed: int = 0) -> tuple[bool, str]:
    """Fast checkers agree with literal enumeration of the definitions."""
    rng = np.random.default_rng(seed)
    bad = []
    for k in range(100):
        g = _random_small_graph(rng, n_max=8)
        fast = max_robustness(g)
        slow = oracles.naive_max_robustness(g)
        if fast != slow:
            bad.append((k, "max_robust", fast, slow))
        for r in range(1, g.n + 1):
            if is_r_robust(g, r) != (slow >= r):
                bad.append((k, "robust", r))
            if is_strongly_r_robust(g, r) != oracles.naive_is_strongly_r_robust(g, r):
                bad.append((k, "strong", r))
    return not bad, f"100 graphs, {len(bad)} disagreements" + (f": {bad[:3]}" if bad else "")


# --- construction ---------------------------------------------------------------


@claim("growth-robustness")
def growth_robustness(seed: int = 0) -> tuple[bool, str]:
    """Growth keeps r-robustness at every step; preferential draws follow degree."""
    configs = [(2, 3), (2, 4), (2, 5), (3, 5)]
    modes = ("uniform", "preferential")
    bad = []
    for k in range(50):
        r, size = configs[k % len(configs)]
        policy = GrowthPolicy(r=r, mode=modes[(k // len(configs)) % 2], seed=seed * 1000 + k)
        for h in grow_trace(complete_graph(size), policy, 12):
            if not is_r_robust(h, r):
                bad.append((k, h.n))
                break

    base = cpa_gap_graph()
    draws = 10_000
    counts = np.zeros(base.n)
    for k in range(draws):
        h = grow(base, GrowthPolicy(r=1, mode="preferential", seed=seed * draws + k), base.n + 1)
        counts[next(iter(h.in_neighbors(base.n)))] += 1
    w = attachment_weights(base)
    p = w / w.sum()
    se = np.sqrt(p * (1 - p) / draws)
    z = np.abs(counts / draws - p) / se
    freq_ok = bool((z <= 3).all())
    return not bad and freq_ok, f"50 traces, {len(bad)} non-robust steps; max |z| over {base.n} nodes = {z.max():.2f}"


# --- broadcast ------------------------------------------------------------------

WORST_CASE_LIES = [
    LieStrategy("lie"),
    LieStrategy("lie", byzantine=True),
    LieStrategy("silent"),
    LieStrategy("random", byzantine=True, seed=11),
]


@claim("cpa-strong-robustness", limit=10)
def cpa_strong_robustness(seed: int = 0) -> tuple[bool, str]:
    """CPA succeeds on a strongly 3-robust graph whose X(G) is only 2."""
    g = cpa_gap_graph()
    xg, v, s = x_graph_witness(g)
    x87 = x_metric(g, 7, 0)
    strong = is_strongly_r_robust(g, 3)
    sweep = cpa_sweep(g, 1, sources=[0], strategies=WORST_CASE_LIES)
    ok = xg <= 2 and x87 == 2 and strong and sweep.ok
    return ok, f"X(G)={xg} (v={v}, s={s}) X(node 7, source 0)={x87} strongly 3-robust:{strong} CPA runs={sweep.runs} failures={len(sweep.failures)}"


@claim("cpa-x-metric")
def cpa_x_metric(seed: int = 0) -> tuple[bool, str]:
    """Every random graph with X(G) > 2 lets CPA through any 1-local attack."""
    rng = np.random.default_rng(seed)
    found, attempts, bad = 0, 0, []
    while found < 20 and attempts < 5000:
        attempts += 1
        g = random_graph(int(rng.integers(5, 10)), float(rng.uniform(0.6, 0.95)), rng)
        try:
            xg = x_graph(g)
        except ValueError:
            continue
        if not xg > 2 or xg == math.inf:
            continue
        found += 1
        sweep = cpa_sweep(g, 1, strategies=WORST_CASE_LIES)
        if not sweep.ok:
            bad.append(sorted(g.edges))
    return found == 20 and not bad, f"{found} graphs with 2 < X(G) < inf in {attempts} draws, {len(bad)} CPA failures"


# --- manifests ------------------------------------------------------------------

PAPER_CLAIMS = "paper-claims"


def load_manifest(ref: str) -> tuple[dict, Path]:
    if ref == PAPER_CLAIMS:
        text = resources.files("robustnet").joinpath("data/paper-claims.json").read_text()
        return json.loads(text), Path(".")
    path = Path(ref)
    return json.loads(path.read_text()), path.parent


def run_manifest(manifest: dict, base: Path = Path("."), seed: int | None = None) -> list[ClaimResult]:
    """Run each manifest item. Items name a ``claim`` or a ``scenario`` file with an ``expect`` outcome."""
    from .io import read_scenario

    seed = manifest.get("seed", 0) if seed is None else seed
    items = manifest.get("items", [])
    if not items:
        log.warning("manifest %r has no items; nothing to check", manifest.get("name", "?"))
    results = []
    for item in items:
        name = item.get("name") or item.get("claim") or item.get("scenario") or "?"
        if "claim" in item:
            res = run_claim(item["claim"], seed)
            res.name = name
        elif "scenario" in item:
            start = time.perf_counter()
            try:
                sc, raw = read_scenario(base / item["scenario"])
                _, verdict = simulate(sc)
                expect = item.get("expect", raw.get("expect"))
                if expect is not None and expect not in {o.value for o in Outcome}:
                    raise ValueError(f"expected verdict {expect!r} is not one of {[o.value for o in Outcome]}")
                passed = expect is None or verdict.outcome.value == expect
                detail = f"verdict={verdict.outcome.value} expected={expect}"
            except Exception as exc:
                passed, detail = False, f"error: {type(exc).__name__}: {exc}"
            res = ClaimResult(name, passed, detail, time.perf_counter() - start)
        else:
            res = ClaimResult(name, False, "item needs 'claim' or 'scenario'", 0.0)
        results.append(res)
    return results


def claim_names() -> list[str]:
    return list(CLAIMS)


def summary(results: list[ClaimResult], seed: int | None = None) -> dict[str, Any]:
    """Machine-readable summary. Timings are left out so that reruns give identical files."""
    return {
        "seed": seed,
        "passed": sum(r.passed for r in results),
        "failed": sum(not r.passed for r in results),
        "results": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
    }
