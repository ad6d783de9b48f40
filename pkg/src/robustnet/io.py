"""File formats: graphs (edge list or JSON), scenarios, trajectories and logs.

Edge-list format::

    n <count> directed|undirected
    j i
    ...

Undirected graphs list each edge once as ``low high``; lines starting with
``#`` are comments. The JSON form is ``{"n": .., "directed": .., "edges": [[j, i], ..]}``
with the same edge convention. Both writers sort edges, so output is stable.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Mapping

from .adversary import AdversaryStrategy
from .consensus import Scenario, ScenarioError, Trajectory, WeightPolicy
from .graph import DiGraph


class GraphFormatError(ValueError):
    pass


def _edge_rows(g: DiGraph) -> list[tuple[int, int]]:
    return sorted(g.edges) if g.directed else g.undirected_edges()


def emit_edgelist(g: DiGraph, comments: Iterable[str] = ()) -> str:
    lines = [f"n {g.n} {'directed' if g.directed else 'undirected'}"]
    lines += [f"# {c}" for c in comments]
    lines += [f"{j} {i}" for j, i in _edge_rows(g)]
    return "\n".join(lines) + "\n"


def parse_edgelist(text: str) -> DiGraph:
    rows = [ln.strip() for ln in text.splitlines()]
    rows = [ln for ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise GraphFormatError("empty graph file")
    head = rows[0].split()
    if len(head) != 3 or head[0] != "n" or head[2] not in ("directed", "undirected"):
        raise GraphFormatError(f"bad header line {rows[0]!r}; expected 'n <count> directed|undirected'")
    try:
        n = int(head[1])
        edges = [tuple(int(tok) for tok in ln.split()) for ln in rows[1:]]
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None
    if any(len(e) != 2 for e in edges):
        raise GraphFormatError("each edge line must hold exactly two node ids")
    return DiGraph.from_edges(n, edges, directed=head[2] == "directed")


def graph_to_json(g: DiGraph) -> dict:
    return {"n": g.n, "directed": g.directed, "edges": [list(e) for e in _edge_rows(g)]}


def graph_from_json(d: Mapping[str, Any]) -> DiGraph:
    try:
        return DiGraph.from_edges(int(d["n"]), (tuple(e) for e in d["edges"]), directed=bool(d["directed"]))
    except (KeyError, TypeError) as exc:
        raise GraphFormatError(f"graph JSON needs n, directed and edges: {exc}") from None


def emit_json(g: DiGraph) -> str:
    return json.dumps(graph_to_json(g), indent=2) + "\n"


def parse_json(text: str) -> DiGraph:
    try:
        return graph_from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from None


def _is_json(path: Path, fmt: str | None) -> bool:
    if fmt is not None:
        return fmt == "json"
    return path.suffix.lower() == ".json"


def read_graph(path: str | os.PathLike, fmt: str | None = None) -> DiGraph:
    path = Path(path)
    text = path.read_text()
    return parse_json(text) if _is_json(path, fmt) else parse_edgelist(text)


def write_graph(g: DiGraph, path: str | os.PathLike, fmt: str | None = None, comments: Iterable[str] = ()) -> None:
    path = Path(path)
    text = emit_json(g) if _is_json(path, fmt) else emit_edgelist(g, comments)
    write_atomic(path, text)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


# --- scenarios ---------------------------------------------------------------


def _load_graph_ref(ref: Any, base: Path) -> DiGraph:
    if isinstance(ref, str):
        return read_graph(base / ref)
    if isinstance(ref, Mapping):
        return graph_from_json(ref)
    raise ScenarioError(f"graph reference must be a path or an inline graph, got {type(ref).__name__}")


def scenario_from_dict(d: Mapping[str, Any], base: Path = Path(".")) -> Scenario:
    """Build a scenario from its JSON form; graph paths are relative to ``base``."""
    if "topology" in d:
        topo = [_load_graph_ref(ref, base) for ref in d["topology"]]
    elif "graph" in d:
        topo = _load_graph_ref(d["graph"], base)
    else:
        raise ScenarioError("scenario needs 'graph' or 'topology'")
    strat = dict(d.get("strategy", {}))
    if "seed" in d:
        # a top-level seed drives the adversary's generator unless the strategy pins its own
        strat.setdefault("seed", d["seed"])
    try:
        return Scenario(
            topology=topo,
            f=int(d["f"]),
            initial_values=d["initial_values"],
            malicious=frozenset(d.get("malicious", [])),
            strategy=AdversaryStrategy.from_dict(strat),
            weights=WeightPolicy.from_dict(d.get("weights", {})),
            horizon=d.get("T"),
            tol=float(d.get("tol", 1e-9)),
            stall_window=int(d.get("stall_window", 25)),
            clamp=float(d.get("clamp", 1e12)),
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario is missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ScenarioError(f"bad scenario field: {exc}") from None


def scenario_to_dict(sc: Scenario) -> dict:
    gs = sc.graphs
    d: dict[str, Any] = {}
    if isinstance(sc.topology, DiGraph):
        d["graph"] = graph_to_json(sc.topology)
    else:
        d["topology"] = [graph_to_json(h) for h in gs]
    d.update(
        f=sc.f,
        malicious=sorted(sc.malicious),
        strategy=sc.strategy.to_dict(),
        seed=sc.strategy.seed,
        initial_values=list(sc.initial_values),
        weights=sc.weights.to_dict(),
        T=sc.horizon,
        tol=sc.tol,
        stall_window=sc.stall_window,
        clamp=sc.clamp,
    )
    return d


def read_scenario(path: str | os.PathLike) -> tuple[Scenario, dict]:
    """Returns the scenario and the raw document (for fields such as ``expect``)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON: {exc}") from None
    return scenario_from_dict(raw, path.parent), raw


# --- outputs ----------------------------------------------------------------

TRAJECTORY_COLUMNS = ("t", "node", "value", "is_malicious", "removed_count")
CPA_LOG_COLUMNS = ("round", "node", "accepted_value")


def trajectory_csv(traj: Trajectory) -> str:
    """One row per (step, node). ``removed_count`` is empty for faulty nodes and for the final step."""
    lines = [",".join(TRAJECTORY_COLUMNS)]
    for t, row in enumerate(traj.values):
        for i, v in enumerate(row):
            bad = i in traj.malicious
            rc = "" if bad or t >= len(traj.removed_count) else str(traj.removed_count[t][i])
            lines.append(f"{t},{i},{v!r},{int(bad)},{rc}")
    return "\n".join(lines) + "\n"


def cpa_log_csv(log: Iterable[tuple[int, int, Any]]) -> str:
    lines = [",".join(CPA_LOG_COLUMNS)]
    lines += [f"{rnd},{node},{value}" for rnd, node, value in log]
    return "\n".join(lines) + "\n"


def read_csv_rows(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
