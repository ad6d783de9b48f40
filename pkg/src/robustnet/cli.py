"""Command line entry point.

Exit codes: 0 success, 1 a claim or verdict failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import claims
from .broadcast import LieStrategy, cpa_run, x_graph
from .consensus import ScenarioError, WeightPolicyError, simulate
from .adversary import AdversaryError
from .construction import GrowthPolicy, grow, recommended_seed
from .graph import complete_graph, cpa_gap_graph, star_graph, tight_robust_graph, two_clique_graph
from .io import (
    GraphFormatError,
    cpa_log_csv,
    dump_json,
    emit_edgelist,
    emit_json,
    read_graph,
    read_scenario,
    trajectory_csv,
    write_atomic,
    write_graph,
)
from .robustness import SizeLimitError, analyze, f_local_sets

log = logging.getLogger("robustnet")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FAMILIES = ("complete", "star", "prop1", "fig1-tight", "prop4", "pref-attach")


class UsageError(Exception):
    pass


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"family {args.family!r} needs {', '.join(missing)}")


def cmd_generate(args) -> int:
    fam = args.family
    if fam == "complete":
        _need(args, "n")
        g = complete_graph(args.n)
    elif fam == "star":
        _need(args, "n")
        g = star_graph(args.n)
    elif fam == "prop1":
        _need(args, "n", "f")
        g = two_clique_graph(args.n, args.f)
    elif fam == "fig1-tight":
        _need(args, "f")
        g = tight_robust_graph(args.f)
    elif fam == "prop4":
        g = cpa_gap_graph()
    else:
        _need(args, "n", "r")
        g = grow(recommended_seed(args.r), GrowthPolicy(r=args.r, mode="preferential", seed=args.seed), args.n)
    comments = [f"family={fam} seed={args.seed}"] if fam == "pref-attach" else []
    if args.out:
        write_graph(g, args.out, args.format, comments)
        stream = sys.stdout
    else:
        sys.stdout.write(emit_json(g) if args.format == "json" else emit_edgelist(g, comments))
        stream = sys.stderr
    edges = len(g.edges) if g.directed else len(g.edges) // 2
    print(f"n={g.n} edges={edges} min_degree={g.min_degree()} directed={g.directed}", file=stream)
    return EXIT_OK


def cmd_analyze(args) -> int:
    g = read_graph(args.graph, args.format)
    report = analyze(g).to_dict()
    try:
        xg = x_graph(g)
        report["x_graph"] = "inf" if xg == float("inf") else int(xg)
    except ValueError as exc:
        report["x_graph"] = None
        report["errors"]["x_graph"] = str(exc)
    if args.f is not None and report["x_graph"] is not None:
        report["x_graph_exceeds_2f"] = report["x_graph"] == "inf" or report["x_graph"] > 2 * args.f
    text = dump_json(report)
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate_wmsr(args) -> int:
    sc, raw = read_scenario(args.scenario)
    traj, verdict = simulate(sc)
    out = Path(args.out_dir)
    seed = sc.strategy.seed
    write_atomic(out / "trajectory.csv", trajectory_csv(traj))
    write_atomic(out / "verdict.json", dump_json({**verdict.to_dict(), "seed": seed, "scenario": str(args.scenario)}))
    print(f"{verdict.outcome.value} after {verdict.steps_used} steps, safe={verdict.safe}")
    expect = raw.get("expect")
    if expect is not None and expect != verdict.outcome.value:
        print(f"expected {expect}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _parse_ids(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad node id list {text!r}") from None


def cmd_simulate_cpa(args) -> int:
    g = read_graph(args.graph, args.format)
    strategy = LieStrategy(args.strategy, byzantine=args.byzantine, seed=args.seed)
    if args.sweep_all_f_local:
        sets = list(f_local_sets(g, args.f, exclude=[args.source]))
    else:
        sets = [frozenset(_parse_ids(args.malicious))]
    rows, runs = [], []
    for bad in sets:
        res = cpa_run(g, args.source, args.f, bad, strategy)
        runs.append({
            "malicious": sorted(bad),
            "success": res.success,
            "accepted": sorted(res.accepted),
            "rounds": res.rounds,
            "wrong_accepts": {str(k): str(v) for k, v in res.wrong.items()},
        })
        rows.extend(res.log)
    ok = all(r["success"] for r in runs)
    summary = {
        "source": args.source,
        "f": args.f,
        "strategy": args.strategy,
        "byzantine": args.byzantine,
        "seed": args.seed,
        "runs": len(runs),
        "failures": sum(not r["success"] for r in runs),
        "success": ok,
        "details": runs,
    }
    if args.out_dir:
        out = Path(args.out_dir)
        write_atomic(out / "acceptance_log.csv", cpa_log_csv(rows))
        write_atomic(out / "summary.json", dump_json(summary))
    else:
        sys.stdout.write(dump_json(summary))
    print(f"CPA {'succeeded' if ok else 'failed'} in {summary['runs'] - summary['failures']}/{summary['runs']} runs", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_reproduce(args) -> int:
    try:
        manifest, base = claims.load_manifest(args.manifest)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read manifest {args.manifest!r}: {exc}") from None
    seed = manifest.get("seed", 0) if args.seed is None else args.seed
    results = claims.run_manifest(manifest, base, seed)
    for r in results:
        print(r.line(), flush=True)
    if args.out:
        write_atomic(Path(args.out), dump_json(claims.summary(results, seed)))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robustnet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a graph from one of the built-in families")
    gen.add_argument("--family", required=True, choices=FAMILIES)
    gen.add_argument("--n", type=int)
    gen.add_argument("--f", type=int)
    gen.add_argument("--r", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output file; stdout if omitted")
    gen.add_argument("--format", choices=("edgelist", "json"), help="default: by file extension")
    gen.set_defaults(func=cmd_generate)

    an = sub.add_parser("analyze", help="robustness report as JSON")
    an.add_argument("graph")
    an.add_argument("--f", type=int, help="also report whether X(G) > 2f")
    an.add_argument("--format", choices=("edgelist", "json"))
    an.add_argument("--out")
    an.set_defaults(func=cmd_analyze)

    sim = sub.add_parser("simulate", help="run W-MSR or CPA")
    simsub = sim.add_subparsers(dest="algorithm", required=True)
    wm = simsub.add_parser("wmsr")
    wm.add_argument("--scenario", required=True)
    wm.add_argument("--out-dir", required=True)
    wm.set_defaults(func=cmd_simulate_wmsr)

    cpa = simsub.add_parser("cpa")
    cpa.add_argument("--graph", required=True)
    cpa.add_argument("--source", type=int, required=True)
    cpa.add_argument("--f", type=int, required=True)
    group = cpa.add_mutually_exclusive_group()
    group.add_argument("--malicious", help="comma separated node ids")
    group.add_argument("--sweep-all-f-local", action="store_true")
    cpa.add_argument("--byzantine", action="store_true")
    cpa.add_argument("--strategy", choices=("lie", "silent", "random"), default="lie")
    cpa.add_argument("--seed", type=int, default=0)
    cpa.add_argument("--format", choices=("edgelist", "json"))
    cpa.add_argument("--out-dir")
    cpa.set_defaults(func=cmd_simulate_cpa)

    rep = sub.add_parser("reproduce", help="run a claim manifest ('paper-claims' or a JSON file)")
    rep.add_argument("manifest")
    rep.add_argument("--seed", type=int)
    rep.add_argument("--out", help="write a JSON summary here")
    rep.set_defaults(func=cmd_reproduce)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, OSError, GraphFormatError, ScenarioError, WeightPolicyError, AdversaryError, SizeLimitError, ValueError, IndexError) as exc:
        print(f"robustnet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
