#!/usr/bin/env python3
"""Exports the spatial memory image after each step of one oracle episode.

Produces a numbered PNG series (red traversed path, blue start/current
markers) with per-image scale sidecars, showing the rescaling ladder and
the reinitialization at each landmark.

    python3 scripts/render_memory_walk.py --difficulty 3 --seed 7 --out memdir
"""

import argparse
from pathlib import Path

from navsim.engine import Environment, Episode, make_bundle
from navsim.memory import export_png
from navsim.synthworld import WorldSpec, generate_episode, generate_world


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--difficulty", type=int, choices=(1, 2, 3, 4), default=3)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--grid", type=int, default=10)
    parser.add_argument("--out", default="memory_frames")
    args = parser.parse_args()

    world = generate_world(WorldSpec(seed=args.seed, rows=args.grid, cols=args.grid))
    env = Environment(world.graph, world.features)
    episode = generate_episode(world, args.difficulty, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ep = Episode(env, episode.route, episode.instruction)
    bundle = make_bundle("oracle", env)
    frame = 0
    export_png(ep.state.memory, out / f"frame_{frame:03d}.png")
    while ep.state.done == "running":
        record = ep.step(bundle)
        frame += 1
        export_png(ep.state.memory, out / f"frame_{frame:03d}.png")
        tag = "fire" if record["phi"] == 1 else f"-> {record['moved_to']}"
        print(f"step {record['step']:>3}  node {record['node']:>4}  eta {record['eta']:.0f}  "
              f"scale {ep.state.memory.scale:.2f} m/px  {tag}")
    print(f"\n{ep.state.done}: {frame + 1} frames in {out}/ "
          f"(instruction: {episode.instruction.raw_text!r})")


if __name__ == "__main__":
    main()
