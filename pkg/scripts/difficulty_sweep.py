#!/usr/bin/env python3
"""Oracle vs. random SPL across difficulty levels 1-4 on a synthetic world.

Mirrors the cross-difficulty evaluation protocol: harder episodes carry
more landmarks (and proportionally longer routes). The oracle pins the
ceiling at 100; the random walk decays with difficulty.

    python3 scripts/difficulty_sweep.py --episodes 200 --seed 0 --out sweep.json
"""

import argparse
import json
import time

from navsim.engine import Environment, make_bundle, run_episode
from navsim.evaluation import result_from_log, summarize
from navsim.synthworld import WorldSpec, generate_episode, generate_world


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=200, help="episodes per difficulty")
    parser.add_argument("--grid", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="optional JSON report path")
    args = parser.parse_args()

    world = generate_world(WorldSpec(seed=args.seed, rows=args.grid, cols=args.grid))
    env = Environment(world.graph, world.features)

    table = {}
    started = time.perf_counter()
    for difficulty in (1, 2, 3, 4):
        episodes = [
            generate_episode(world, difficulty, seed=args.seed + difficulty * 10_000 + i)
            for i in range(args.episodes)
        ]
        rows = {}
        for mode in ("oracle", "random"):
            results = [
                result_from_log(run_episode(env, ep.route, ep.instruction,
                                            make_bundle(mode, env, seed=i)))
                for i, ep in enumerate(episodes)
            ]
            rows[mode] = summarize(results).to_dict()
        table[difficulty] = rows

    print(f"\n{args.episodes} episodes per difficulty, grid {args.grid}x{args.grid}, "
          f"seed {args.seed} ({time.perf_counter() - started:.1f}s)\n")
    print(f"{'difficulty':>10} {'oracle SPL':>11} {'random SPL':>11} "
          f"{'rnd nav err':>12} {'rnd steps':>10}")
    for difficulty, rows in table.items():
        print(f"{difficulty:>10} {rows['oracle']['spl']:>11.2f} "
              f"{rows['random']['spl']:>11.2f} {rows['random']['nav_error']:>12.1f} "
              f"{rows['random']['total_steps']:>10.1f}")

    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(table, f, indent=1)
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
