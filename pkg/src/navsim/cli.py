"""Command-line entry points.

    navsim dataset   generate a synthetic dataset directory
    navsim routegen  sample routes on a graph via clustered endpoints + A*
    navsim landmarks mine landmarks for an existing route file
    navsim run       run a programmatic episode and write its log
    navsim eval      aggregate trajectory logs into a metrics report
    navsim serve     start the HTTP session service
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import evaluation
from .citygraph import find_intersections, load_graph
from .engine import Environment, Episode, EpisodeConfig, TrajectoryLog, make_bundle
from .landmarks import HashScorer, ObjectiveWeights, select_exact, select_greedy
from .routegen import (
    cluster_nodes,
    load_route,
    route_to_dict,
    sample_endpoints,
    shortest_route,
)
from .service import DEFAULT_PORT, serve
from .synthworld import WorldSpec, export_dataset, generate_episode, generate_world, load_dataset


def _cmd_dataset(args) -> int:
    spec = WorldSpec(seed=args.seed, rows=args.grid, cols=args.grid,
                     spacing_m=args.spacing)
    world = generate_world(spec)
    episodes = []
    for i in range(args.episodes):
        difficulty = args.difficulty or (i % 4 + 1)
        episodes.append(generate_episode(world, difficulty, seed=args.seed + i))
    out = export_dataset(world, episodes, args.out, name=Path(args.out).name)
    print(f"wrote {len(episodes)} episodes to {out}")
    return 0


def _cmd_routegen(args) -> int:
    graph = load_graph(args.graph)
    assignment = cluster_nodes(graph, args.k, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for i in range(args.count):
        src, dst = sample_endpoints(assignment, args.seed + i)
        route = shortest_route(graph, src, dst)
        with open(out / f"route_{i:04d}.json", "w", encoding="utf-8") as f:
            json.dump(route_to_dict(route), f)
            f.write("\n")
        written += 1
    print(f"wrote {written} routes to {out}")
    return 0


def _cmd_landmarks(args) -> int:
    graph = load_graph(args.graph)
    route = load_route(graph, args.route)
    weights = ObjectiveWeights(w1=args.w1, w2=args.w2, w3=args.w3,
                               sigma=args.sigma, l=args.l)
    solver = select_exact if args.exact else select_greedy
    selection = solver(route, weights, HashScorer(args.seed), find_intersections(graph))
    raw = route_to_dict(route)
    ordered = sorted(selection.node_ids, key=route.positions().__getitem__)
    raw["landmarks"] = [route.source, *ordered, route.destination]
    raw["objective"] = selection.objective_value
    with open(args.route, "w", encoding="utf-8") as f:
        json.dump(raw, f)
        f.write("\n")
    print(f"selected {list(selection.node_ids)} (objective {selection.objective_value:.4f})")
    return 0


def _cmd_run(args) -> int:
    dataset = load_dataset(args.data)
    ep = dataset.episodes.get(args.route)
    if ep is None:
        print(f"unknown route {args.route!r}; available: {sorted(dataset.episodes)}",
              file=sys.stderr)
        return 1
    env = Environment(dataset.graph, dataset.features)
    bundle = make_bundle(args.mode, env, seed=args.seed)
    episode = Episode(env, ep.route, ep.instruction, EpisodeConfig(max_steps=args.max_steps))
    log = episode.run(bundle, route_id=ep.episode_id, seed=args.seed)
    Path(args.out).write_text(log.to_jsonl(), encoding="utf-8")
    print(f"{ep.episode_id}: {log.outcome} after {log.steps} steps "
          f"({log.traveled:.0f} m / shortest {log.shortest_length:.0f} m)")
    return 0


def _cmd_eval(args) -> int:
    logs = sorted(Path(args.logs).glob("*.jsonl"))
    if not logs:
        print(f"no .jsonl logs under {args.logs}", file=sys.stderr)
        return 1
    results = [
        evaluation.result_from_log(TrajectoryLog.from_jsonl(p.read_text(encoding="utf-8")))
        for p in logs
    ]
    report = evaluation.summarize(results)
    with open(args.out, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=1)
        f.write("\n")
    print(f"n={report.n} SPL={report.spl:.2f}% nav_error={report.nav_error:.1f} m "
          f"steps={report.total_steps:.1f}")
    return 0


def _cmd_serve(args) -> int:
    serve(args.data, port=args.port, log_dir=args.log_dir)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="navsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dataset", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=10, help="grid side length")
    p.add_argument("--spacing", type=float, default=100.0, help="node spacing, meters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=8)
    p.add_argument("--difficulty", type=int, choices=(1, 2, 3, 4), default=None,
                   help="fixed difficulty (default: cycle 1..4)")
    p.set_defaults(fn=_cmd_dataset)

    p = sub.add_parser("routegen", help="sample shortest routes on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_routegen)

    p = sub.add_parser("landmarks", help="mine landmarks for a route file")
    p.add_argument("--route", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--w1", type=float, default=1.0)
    p.add_argument("--w2", type=float, default=1.0)
    p.add_argument("--w3", type=float, default=3.0)
    p.add_argument("--sigma", type=float, default=15.0)
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="exhaustive instead of greedy")
    p.set_defaults(fn=_cmd_landmarks)

    p = sub.add_parser("run", help="run one programmatic episode")
    p.add_argument("--data", required=True)
    p.add_argument("--route", required=True)
    p.add_argument("--mode", choices=("oracle", "random", "cosine"), default="oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=60)
    p.add_argument("--out", default="episode.jsonl")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("eval", help="aggregate logs into a metrics report")
    p.add_argument("--logs", required=True)
    p.add_argument("--out", default="report.json")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("--data", required=True)
    p.add_argument("--port", type=int, default=int(os.environ.get("NAVSIM_PORT", DEFAULT_PORT)))
    p.add_argument("--log-dir", default=None)
    p.set_defaults(fn=_cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
