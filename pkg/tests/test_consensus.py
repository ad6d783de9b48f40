import math

import numpy as np
import pytest

from robustnet.adversary import AdversaryError, AdversaryStrategy
from robustnet.consensus import (
    Outcome,
    Scenario,
    ScenarioError,
    WeightPolicy,
    WeightPolicyError,
    necessity_demo,
    simulate,
    wmsr_filter,
    wmsr_step,
)
from robustnet.graph import (
    DiGraph,
    complete_graph,
    disjoint_union,
    random_graph,
    tight_robust_blocks,
    tight_robust_graph,
    two_clique_blocks,
    two_clique_graph,
)
from robustnet.robustness import f_local_sets


def test_filter_removes_extremes():
    assert wmsr_filter(0.0, [(1, -10.0), (2, 1.0), (3, 2.0)], 1) == [(2, 1.0)]


def test_filter_keeps_equal_values():
    nb = [(1, 5.0), (2, 5.0), (3, 5.0)]
    for f in range(4):
        assert wmsr_filter(5.0, nb, f) == nb


def test_filter_removes_all_when_fewer_than_f():
    assert wmsr_filter(0.0, [(1, 3.0), (2, -1.0), (3, 0.0)], 2) == [(3, 0.0)]


def test_filter_tie_breaks_lowest_id():
    assert wmsr_filter(0.0, [(4, 1.0), (2, 1.0), (7, 0.5)], 1) == [(4, 1.0), (7, 0.5)]


def test_filter_two_clique_node_drops_its_cross_neighbor():
    g = two_clique_graph(10, 1)
    a, b = two_clique_blocks(10)
    x = [0.0 if i in a else 1.0 for i in range(10)]
    kept = wmsr_filter(x[0], [(j, x[j]) for j in sorted(g.in_neighbors(0))], 1)
    assert {j for j, _ in kept} == g.in_neighbors(0) & a


def test_filter_rejects_negative_f():
    with pytest.raises(ValueError):
        wmsr_filter(0.0, [], -1)


def test_step_equal_weights_half():
    g = DiGraph.from_edges(2, [(0, 1)])
    nxt, removed = wmsr_step([0.0, 1.0], g, 0, WeightPolicy())
    assert nxt == [0.5, 0.5] and removed == [0, 0]


def test_step_fixed_point():
    g = complete_graph(5)
    assert wmsr_step([0.3] * 5, g, 1, WeightPolicy())[0] == [0.3] * 5


def test_step_two_clique_frozen():
    g = two_clique_graph(10, 1)
    a, _ = two_clique_blocks(10)
    x = [0.0 if i in a else 1.0 for i in range(10)]
    assert wmsr_step(x, g, 1, WeightPolicy())[0] == x


def test_table_policy():
    g = DiGraph.from_edges(2, [(0, 1)])
    table = {0: {0: 3.0, 1: 1.0}, 1: {1: 1.0, 0: 1.0}}
    nxt, _ = wmsr_step([0.0, 1.0], g, 0, WeightPolicy("table", table, alpha_floor=0.2))
    assert nxt == [0.25, 0.5]


def test_table_policy_floor_violation():
    g = DiGraph.from_edges(2, [(0, 1)])
    table = {0: {0: 9.0, 1: 1.0}, 1: {1: 1.0, 0: 1.0}}
    with pytest.raises(WeightPolicyError):
        wmsr_step([0.0, 1.0], g, 0, WeightPolicy("table", table, alpha_floor=0.2))


def test_table_policy_missing_entries():
    g = DiGraph.from_edges(2, [(0, 1)])
    with pytest.raises(WeightPolicyError):
        wmsr_step([0.0, 1.0], g, 0, WeightPolicy("table", {0: {0: 1.0}}))
    with pytest.raises(WeightPolicyError):
        WeightPolicy("table")
    with pytest.raises(WeightPolicyError):
        WeightPolicy(alpha_floor=1.5)


def test_weight_policy_round_trip():
    w = WeightPolicy("table", {0: {0: 1.0, 1: 2.0}}, alpha_floor=0.1)
    assert WeightPolicy.from_dict(w.to_dict()) == w


def test_k5_constant_liar_converges_safely():
    sc = Scenario(complete_graph(5), 1, [1, 2, 3, 4, 0], malicious={4}, strategy=AdversaryStrategy("constant", value=100.0))
    traj, v = simulate(sc)
    assert v.outcome is Outcome.CONVERGED and v.safe
    assert 1 <= v.value <= 4
    assert traj.Phi[-1] < 1e-9


def test_two_clique_stalls_with_constant_spread():
    g = two_clique_graph(10, 1)
    a, _ = two_clique_blocks(10)
    sc = Scenario(g, 1, [0.0 if i in a else 1.0 for i in range(10)])
    traj, v = simulate(sc)
    assert v.outcome is Outcome.STALLED
    assert all(p == 1.0 for p in traj.Phi)


def test_tight_graph_freezes_a_and_b():
    f = 1
    g = tight_robust_graph(f)
    blocks = tight_robust_blocks(f)
    bad = {blocks["S1"][0], blocks["S3"][0]}
    init = [0.5] * g.n
    init[blocks["a"]] = 0.0
    init[blocks["b"]] = 1.0
    init[blocks["S1"][0]] = 0.0
    init[blocks["S3"][0]] = 1.0
    sc = Scenario(g, f, init, malicious=bad, strategy=AdversaryStrategy("constant"), horizon=1000, stall_window=1000)
    traj, v = simulate(sc)
    assert v.outcome is Outcome.STALLED
    assert set(traj.node(blocks["a"])) == {0.0}
    assert set(traj.node(blocks["b"])) == {1.0}


def test_necessity_demo():
    sc = necessity_demo(two_clique_graph(10, 1), 1)
    assert set(sc.witness) == set(two_clique_blocks(10))
    assert not sc.malicious
    assert sorted(set(sc.initial_values)) == [0.0, 1.0]
    assert simulate(sc)[1].outcome is Outcome.STALLED
    assert necessity_demo(complete_graph(5), 1) is None


def test_necessity_demo_disjoint_triangles():
    g = disjoint_union(complete_graph(3), complete_graph(3))
    sc = necessity_demo(g, 0)
    assert sc is not None
    assert simulate(sc)[1].outcome is Outcome.STALLED


def test_time_varying_with_edgeless_graph_converges():
    empty = DiGraph(5, frozenset())
    sc = Scenario([complete_graph(5), empty], 1, [0, 1, 2, 3, 50], malicious={4}, strategy=AdversaryStrategy("random", seed=3))
    traj, v = simulate(sc)
    assert v.outcome is Outcome.CONVERGED and v.safe
    # edgeless steps leave normal values alone
    for t in range(1, len(traj.values) - 1, 2):
        assert [traj.values[t + 1][i] for i in range(4)] == [traj.values[t][i] for i in range(4)]


def test_byzantine_battery_on_k7():
    g = complete_graph(7)
    for bad in f_local_sets(g, 1):
        sc = Scenario(g, 1, [float(i) for i in range(7)], malicious=bad,
                      strategy=AdversaryStrategy("random", model="byzantine", low=-1e3, high=1e3, seed=8))
        _, v = simulate(sc)
        assert v.outcome is Outcome.CONVERGED and v.safe


def test_split_and_ramp_strategies_safe():
    g = complete_graph(5)
    for strat in (AdversaryStrategy("split", model="byzantine"), AdversaryStrategy("ramp", value=-5, slope=0.5), AdversaryStrategy("split")):
        _, v = simulate(Scenario(g, 1, [0, 1, 2, 3, 4], malicious={2}, strategy=strat))
        assert v.outcome is Outcome.CONVERGED and v.safe


def test_simulation_is_deterministic():
    g = random_graph(9, 0.7, np.random.default_rng(1))
    sc = Scenario(g, 1, list(np.linspace(0, 1, 9)), malicious={0}, strategy=AdversaryStrategy("random", seed=5), horizon=200)
    t1, v1 = simulate(sc)
    t2, v2 = simulate(sc)
    assert t1.values == t2.values and v1 == v2


def test_range_never_widens_on_random_scenarios():
    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(3, 10))
        g = random_graph(n, float(rng.uniform(0.3, 1.0)), rng)
        f = int(rng.integers(0, 3))
        sets = list(f_local_sets(g, f))
        bad = sets[int(rng.integers(len(sets)))]
        sc = Scenario(g, f, list(rng.uniform(-1, 1, n)), malicious=bad,
                      strategy=AdversaryStrategy("random", low=-5, high=5, seed=int(rng.integers(1000))), horizon=200)
        traj, v = simulate(sc)
        assert all(a >= b for a, b in zip(traj.M_N, traj.M_N[1:]))
        assert all(a <= b for a, b in zip(traj.m_N, traj.m_N[1:]))
        assert v.safe


def test_scenario_rejects_non_local_malicious_set():
    with pytest.raises(ScenarioError):
        simulate(Scenario(complete_graph(5), 1, [0] * 5, malicious={0, 1}))


def test_scenario_rejects_non_local_in_any_topology():
    g2 = complete_graph(4)
    sparse = DiGraph.from_edges(4, [(0, 2), (1, 3)])
    with pytest.raises(ScenarioError):
        simulate(Scenario([sparse, g2], 1, [0] * 4, malicious={0, 1}))


@pytest.mark.parametrize("kw", [
    dict(initial_values=[0, 1]),
    dict(initial_values=[0, 1, math.nan]),
    dict(f=-1),
    dict(malicious={0, 1, 2}, f=3),
    dict(tol=0),
])
def test_scenario_validation(kw):
    base = dict(topology=complete_graph(3), f=1, initial_values=[0, 1, 2])
    base.update(kw)
    with pytest.raises(ScenarioError):
        simulate(Scenario(**base))


def test_nan_from_adversary_is_an_error():
    strat = AdversaryStrategy("custom", func=lambda t, s, r, vals: math.nan)
    with pytest.raises(AdversaryError):
        simulate(Scenario(complete_graph(5), 1, [0, 1, 2, 3, 4], malicious={4}, strategy=strat))


def test_adversary_values_clamped():
    strat = AdversaryStrategy("constant", value=1e300)
    traj, v = simulate(Scenario(complete_graph(5), 1, [0, 1, 2, 3, 4], malicious={4}, strategy=strat, clamp=1e6))
    assert traj.values[0][4] == 1e6 and v.safe


def test_timeout_when_horizon_too_short():
    _, v = simulate(Scenario(complete_graph(5), 1, [0, 1, 2, 3, 4], horizon=2))
    assert v.outcome is Outcome.TIMEOUT and v.steps_used == 2


def test_already_converged():
    _, v = simulate(Scenario(complete_graph(3), 0, [1, 1, 1]))
    assert v.outcome is Outcome.CONVERGED and v.steps_used == 0 and v.value == 1.0
