"""Deterministic synthetic worlds: grid road graphs, planted landmark
phrases, and templated instructions with ground-truth segment labels.

Every node carries a unique landmark phrase ("the crimson tower"); its
observation feature is the hashed embedding of that phrase, so the cosine
matcher sees a real signal while the oracle matcher reads the recorded
correspondence. Directional segments describe the actual route geometry
(compass legs with block counts), so the text is truthful by
construction.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .action import COMPASS_NAMES, bin_of_angle
from .citygraph import (
    CityGraph,
    EARTH_RADIUS_M,
    GeoPoint,
    GraphNode,
    build_graph,
    find_intersections,
    load_graph,
    save_graph,
)
from .instruction import (
    DIRECTION,
    LANDMARK,
    SegmentedInstruction,
    Token,
    group_tokens,
    embed_segment,
    instruction_from_dict,
    instruction_to_dict,
)
from .landmarks import HashScorer, ObjectiveWeights, select_greedy
from .routegen import (
    Route,
    cluster_nodes,
    route_from_dict,
    route_to_dict,
    sample_endpoints,
    shortest_route,
    with_landmarks,
)

_COLORS = ("red", "blue", "green", "amber", "violet", "silver", "golden", "crimson",
           "teal", "ivory", "black", "white", "orange", "pink", "gray", "maroon")
_NOUNS = ("tower", "cafe", "fountain", "statue", "bakery", "library", "cinema",
          "chapel", "garage", "market", "museum", "gallery", "diner", "pharmacy",
          "bookstore", "arcade")

_DEG = math.pi / 180.0


@dataclass(frozen=True)
class WorldSpec:
    seed: int = 0
    rows: int = 10
    cols: int = 10
    spacing_m: float = 100.0
    vocab_size: int = 256
    feature_dim: int = 128
    origin_lat: float = 40.72
    origin_lon: float = -74.00

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError("grid must be at least 2x2")
        if self.spacing_m <= 0:
            raise ValueError("node spacing must be positive")
        if self.vocab_size < self.rows * self.cols:
            raise ValueError("need at least one landmark phrase per node")


@dataclass
class SynthWorld:
    spec: WorldSpec
    graph: CityGraph
    features: dict[int, np.ndarray]
    tags: dict[int, tuple[str, ...]]  # node -> landmark phrase tokens
    _clusters: object = field(default=None, repr=False)


@dataclass
class SynthEpisode:
    episode_id: str
    difficulty: int
    route: Route
    instruction: SegmentedInstruction


def _phrases(spec: WorldSpec) -> list[tuple[str, ...]]:
    all_phrases = [("the", c, n) for c in _COLORS for n in _NOUNS]
    rng = random.Random(spec.seed)
    rng.shuffle(all_phrases)
    return all_phrases[:spec.vocab_size]


def generate_world(spec: WorldSpec) -> SynthWorld:
    """4-connected grid with the requested spacing, seeded phrases/features."""
    dlat = spec.spacing_m / EARTH_RADIUS_M / _DEG
    dlon = spec.spacing_m / (EARTH_RADIUS_M * math.cos(spec.origin_lat * _DEG)) / _DEG

    def node_id(r: int, c: int) -> int:
        return r * spec.cols + c

    nodes = [
        GraphNode(node_id(r, c),
                  GeoPoint(spec.origin_lat + r * dlat, spec.origin_lon + c * dlon),
                  panorama_ref=f"synth/{node_id(r, c)}")
        for r in range(spec.rows)
        for c in range(spec.cols)
    ]
    # Every block gets the nominal spacing as its stored length. Geodesic
    # east-west lengths shrink with latitude (fractions of a millimeter per
    # block here), which would make equally-short grid staircases differ;
    # uniform lengths keep "all shortest paths equal" exact. The rows sit
    # north of the origin row, so stored length >= geodesic and the A*
    # heuristic stays admissible.
    edges: list[tuple[int, int, float | None, float | None]] = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            if c + 1 < spec.cols:
                edges.append((node_id(r, c), node_id(r, c + 1), None, spec.spacing_m))
                edges.append((node_id(r, c + 1), node_id(r, c), None, spec.spacing_m))
            if r + 1 < spec.rows:
                edges.append((node_id(r, c), node_id(r + 1, c), None, spec.spacing_m))
                edges.append((node_id(r + 1, c), node_id(r, c), None, spec.spacing_m))
    graph = build_graph(nodes, edges)

    phrases = _phrases(spec)
    tags = {n.id: phrases[i] for i, n in enumerate(sorted(nodes, key=lambda n: n.id))}
    features = {
        nid: embed_segment([Token(w, LANDMARK) for w in phrase], dim=spec.feature_dim)
        for nid, phrase in tags.items()
    }
    return SynthWorld(spec, graph, features, tags)


def _direction_tokens(world: SynthWorld, sub_nodes: tuple[int, ...]) -> list[Token]:
    """Compass legs over a sub-route: 'go north for 3 blocks then east ...'."""
    legs: list[tuple[str, int]] = []
    for a, b in zip(sub_nodes, sub_nodes[1:]):
        name = COMPASS_NAMES[bin_of_angle(world.graph.edge_between(a, b).bearing)]
        if legs and legs[-1][0] == name:
            legs[-1] = (name, legs[-1][1] + 1)
        else:
            legs.append((name, 1))
    words: list[str] = []
    for i, (name, count) in enumerate(legs):
        words.extend(["then" if i else "go", name, "for", str(count),
                      "blocks" if count != 1 else "block"])
    return [Token(w, DIRECTION) for w in words]


def _instruction_for(world: SynthWorld, route: Route) -> SegmentedInstruction:
    boundaries = route.landmark_ids
    pos = route.positions()
    tokens: list[Token] = []
    for j in range(1, len(boundaries)):
        lo, hi = pos[boundaries[j - 1]], pos[boundaries[j]]
        tokens.extend(Token(w, LANDMARK) for w in world.tags[boundaries[j]])
        tokens.extend(_direction_tokens(world, route.node_ids[lo:hi + 1]))
    return group_tokens(tokens, landmark_node_ids=tuple(boundaries[1:]))


def _cluster_assignment(world: SynthWorld):
    if world._clusters is None:
        world._clusters = cluster_nodes(world.graph, k=5, seed=world.spec.seed)
    return world._clusters


def generate_episode(world: SynthWorld, difficulty: int, seed: int) -> SynthEpisode:
    """Samples a route with `difficulty` landmarks and templated instructions.

    Endpoints come from distinct k-means clusters; intermediates (for
    difficulty > 1) from greedy mining over the route. Routes are resampled
    until they can host the requested landmark count and their edge count
    lands in a difficulty-scaled band: one landmark per sub-route's worth
    of distance, so harder episodes are also longer.
    """
    if not 1 <= difficulty <= 4:
        raise ValueError("difficulty must be 1..4")
    assignment = _cluster_assignment(world)
    intermediates_needed = difficulty - 1
    min_edges = 2 * difficulty
    max_edges = 6 * difficulty
    for attempt in range(500):
        src, dst = sample_endpoints(assignment, seed * 1000 + attempt)
        route = shortest_route(world.graph, src, dst)
        edges = len(route.node_ids) - 1
        if min_edges <= edges <= max_edges and \
                len(route.interior()) >= max(intermediates_needed, 1):
            break
    else:
        raise ValueError("world too small to host the requested difficulty")

    if intermediates_needed:
        weights = ObjectiveWeights(l=intermediates_needed)
        picked = select_greedy(route, weights, HashScorer(world.spec.seed),
                               find_intersections(world.graph))
        route = with_landmarks(route, list(picked.node_ids))
    return SynthEpisode(
        episode_id=f"d{difficulty}s{seed}",
        difficulty=difficulty,
        route=route,
        instruction=_instruction_for(world, route),
    )


@dataclass
class Dataset:
    """On-disk dataset: one graph, a feature table, and N episodes."""

    name: str
    graph: CityGraph
    features: dict[int, np.ndarray]
    episodes: dict[str, SynthEpisode]


def export_dataset(world: SynthWorld, episodes: list[SynthEpisode],
                   out_dir: str | Path, name: str = "synth") -> Path:
    out = Path(out_dir)
    (out / "routes").mkdir(parents=True, exist_ok=True)
    (out / "instructions").mkdir(exist_ok=True)
    save_graph(world.graph, out / "graph.json")

    ids = sorted(world.features)
    table = np.stack([world.features[nid] for nid in ids]).astype(np.float32)
    table.tofile(out / "features.bin")
    with open(out / "features_index.json", "w", encoding="utf-8") as f:
        json.dump({"dim": table.shape[1], "ids": ids}, f)

    manifest = {"name": name, "episodes": []}
    for ep in episodes:
        with open(out / "routes" / f"{ep.episode_id}.json", "w", encoding="utf-8") as f:
            json.dump(route_to_dict(ep.route), f)
        with open(out / "instructions" / f"{ep.episode_id}.json", "w", encoding="utf-8") as f:
            json.dump(instruction_to_dict(ep.instruction), f)
        manifest["episodes"].append({
            "id": ep.episode_id,
            "difficulty": ep.difficulty,
            "route": f"routes/{ep.episode_id}.json",
            "instruction": f"instructions/{ep.episode_id}.json",
        })
    with open(out / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=1)
    return out


def load_dataset(path: str | Path) -> Dataset:
    root = Path(path)
    with open(root / "manifest.json", encoding="utf-8") as f:
        manifest = json.load(f)
    graph = load_graph(root / "graph.json")
    with open(root / "features_index.json", encoding="utf-8") as f:
        index = json.load(f)
    table = np.fromfile(root / "features.bin", dtype=np.float32)
    table = table.reshape(len(index["ids"]), index["dim"])
    features = {nid: table[i].astype(np.float64) for i, nid in enumerate(index["ids"])}

    episodes = {}
    for entry in manifest["episodes"]:
        with open(root / entry["route"], encoding="utf-8") as f:
            route = route_from_dict(graph, json.load(f))
        with open(root / entry["instruction"], encoding="utf-8") as f:
            instr = instruction_from_dict(json.load(f))
        episodes[entry["id"]] = SynthEpisode(entry["id"], entry["difficulty"], route, instr)
    return Dataset(manifest.get("name", root.name), graph, features, episodes)
