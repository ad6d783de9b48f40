import json

import pytest

from robustnet.adversary import AdversaryStrategy
from robustnet.consensus import Scenario, ScenarioError, WeightPolicy, simulate
from robustnet.graph import complete_graph, cpa_gap_graph, tight_robust_graph
from robustnet.io import (
    CPA_LOG_COLUMNS,
    TRAJECTORY_COLUMNS,
    cpa_log_csv,
    read_csv_rows,
    read_graph,
    read_scenario,
    scenario_from_dict,
    scenario_to_dict,
    trajectory_csv,
    write_graph,
)
from robustnet.broadcast import cpa_run


@pytest.mark.parametrize("name", ["g.txt", "g.json"])
def test_graph_files(tmp_path, name):
    for g in (cpa_gap_graph(), tight_robust_graph(1)):
        write_graph(g, tmp_path / name)
        assert read_graph(tmp_path / name) == g


def test_scenario_round_trip(tmp_path):
    sc = Scenario([complete_graph(4), complete_graph(4)], 1, [0, 1, 2, 3], malicious={3},
                  strategy=AdversaryStrategy("random", seed=4), weights=WeightPolicy(alpha_floor=0.1), horizon=50)
    d = scenario_to_dict(sc)
    back = scenario_from_dict(json.loads(json.dumps(d)))
    assert simulate(back)[0].values == simulate(sc)[0].values


def test_scenario_file_with_graph_path(tmp_path):
    write_graph(complete_graph(5), tmp_path / "k5.txt")
    (tmp_path / "s.json").write_text(json.dumps({
        "graph": "k5.txt", "f": 1, "malicious": [4], "initial_values": [0, 1, 2, 3, 4],
        "strategy": {"kind": "random"}, "seed": 9, "expect": "CONVERGED",
    }))
    sc, raw = read_scenario(tmp_path / "s.json")
    assert sc.strategy.seed == 9 and raw["expect"] == "CONVERGED"


@pytest.mark.parametrize("doc", [{"f": 1, "initial_values": [0]}, {"graph": 3, "f": 1, "initial_values": [0]}, {"graph": {"n": 1, "directed": False, "edges": []}, "initial_values": [0]}])
def test_scenario_errors(doc):
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)


def test_trajectory_csv(tmp_path):
    traj, _ = simulate(Scenario(complete_graph(3), 1, [0, 1, 2], malicious={2}, strategy=AdversaryStrategy("constant")))
    (tmp_path / "t.csv").write_text(trajectory_csv(traj))
    rows = read_csv_rows(tmp_path / "t.csv")
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    assert len(rows) == 3 * len(traj.values)
    assert float(rows[1]["value"]) == traj.values[0][1]
    assert rows[2]["is_malicious"] == "1" and rows[2]["removed_count"] == ""


def test_cpa_log_csv(tmp_path):
    res = cpa_run(cpa_gap_graph(), 0, 1)
    (tmp_path / "log.csv").write_text(cpa_log_csv(res.log))
    rows = read_csv_rows(tmp_path / "log.csv")
    assert tuple(rows[0]) == CPA_LOG_COLUMNS
    assert len(rows) == 8 and rows[0]["round"] == "0"
