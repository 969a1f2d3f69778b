"""Route sampling: k-means endpoint clusters and A* shortest routes."""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .citygraph import CityGraph, GeoPoint, geodesic_distance

KMEANS_MAX_ITERS = 100
KMEANS_TOL_DEG = 1e-9


class UnreachableError(ValueError):
    """Destination cannot be reached from the source."""


@dataclass(frozen=True)
class Route:
    """An ordered node path with its mined landmarks.

    landmark_ids always starts at the source and ends at the destination;
    intermediates sit strictly between them in traversal order. cum_dists[i]
    is the along-route distance in meters from the source to node_ids[i].
    """

    node_ids: tuple[int, ...]
    total_length: float
    landmark_ids: tuple[int, ...]
    cum_dists: tuple[float, ...]

    def __post_init__(self):
        if not self.node_ids:
            raise ValueError("route has no nodes")
        if len(set(self.node_ids)) != len(self.node_ids):
            raise ValueError("route revisits a node")
        if len(self.cum_dists) != len(self.node_ids):
            raise ValueError("cum_dists must parallel node_ids")
        if self.landmark_ids[0] != self.source or self.landmark_ids[-1] != self.destination:
            raise ValueError("landmarks must start at the source and end at the destination")
        pos = self.positions()
        marks = [pos[n] for n in self.landmark_ids]
        if any(a >= b for a, b in zip(marks, marks[1:])):
            raise ValueError("landmarks must appear on the route in strictly increasing order")

    @property
    def source(self) -> int:
        return self.node_ids[0]

    @property
    def destination(self) -> int:
        return self.node_ids[-1]

    def positions(self) -> dict[int, int]:
        return {n: i for i, n in enumerate(self.node_ids)}

    @property
    def sub_routes(self) -> list[tuple[int, ...]]:
        """Contiguous slices between consecutive landmarks.

        Half-open at the far landmark (the final slice keeps the destination),
        so the slices partition node_ids exactly.
        """
        if len(self.node_ids) == 1:
            return [self.node_ids]
        pos = self.positions()
        cuts = [pos[n] for n in self.landmark_ids]
        out = []
        for i in range(len(cuts) - 1):
            hi = cuts[i + 1] if i + 1 < len(cuts) - 1 else cuts[i + 1] + 1
            out.append(self.node_ids[cuts[i]:hi])
        return out

    def interior(self) -> tuple[int, ...]:
        return self.node_ids[1:-1]


def route_from_nodes(graph: CityGraph, node_ids: list[int]) -> Route:
    """Builds a Route over an explicit node sequence, checking edge existence."""
    cum = [0.0]
    for a, b in zip(node_ids, node_ids[1:]):
        edge = graph.edge_between(a, b)
        if edge is None:
            raise ValueError(f"no edge {a}->{b} in graph")
        cum.append(cum[-1] + edge.length)
    landmarks = (node_ids[0],) if len(node_ids) == 1 else (node_ids[0], node_ids[-1])
    return Route(tuple(node_ids), cum[-1], landmarks, tuple(cum))


def with_landmarks(route: Route, intermediate_ids: list[int]) -> Route:
    """Returns a copy of the route with the given intermediate landmarks."""
    pos = route.positions()
    ordered = sorted(intermediate_ids, key=pos.__getitem__)
    return Route(
        route.node_ids,
        route.total_length,
        (route.source, *ordered, route.destination),
        route.cum_dists,
    )


@dataclass
class ClusterAssignment:
    k: int
    labels: dict[int, int] = field(repr=False)
    centroids: list[GeoPoint]


def cluster_nodes(graph: CityGraph, k: int, seed: int) -> ClusterAssignment:
    """Seeded Lloyd's k-means on raw (lat, lon).

    Initial centroids are k distinct nodes sampled with the given seed.
    Iterates until the largest centroid movement drops below 1e-9 degrees
    or 100 iterations. Euclidean distance on degrees is fine here: the
    clusters only need to keep endpoints apart at city extent.
    """
    if len(graph) == 0:
        raise ValueError("cannot cluster an empty graph")
    if k > len(graph):
        raise ValueError(f"k={k} exceeds node count {len(graph)}")
    rng = random.Random(seed)
    ids = sorted(graph.nodes)
    coords = {nid: (graph.geo(nid).lat, graph.geo(nid).lon) for nid in ids}
    centroids = [coords[nid] for nid in rng.sample(ids, k)]

    labels: dict[int, int] = {}
    for _ in range(KMEANS_MAX_ITERS):
        for nid in ids:
            lat, lon = coords[nid]
            labels[nid] = min(
                range(k),
                key=lambda c: (lat - centroids[c][0]) ** 2 + (lon - centroids[c][1]) ** 2,
            )
        moved = 0.0
        new_centroids = list(centroids)
        for c in range(k):
            members = [coords[nid] for nid in ids if labels[nid] == c]
            if not members:
                continue  # empty cluster keeps its centroid
            lat = sum(m[0] for m in members) / len(members)
            lon = sum(m[1] for m in members) / len(members)
            moved = max(moved, abs(lat - centroids[c][0]), abs(lon - centroids[c][1]))
            new_centroids[c] = (lat, lon)
        centroids = new_centroids
        if moved < KMEANS_TOL_DEG:
            break
    return ClusterAssignment(k, labels, [GeoPoint(lat, lon) for lat, lon in centroids])


def sample_endpoints(assignment: ClusterAssignment, seed: int) -> tuple[int, int]:
    """Draws (source, destination) from two distinct nonempty clusters."""
    members: dict[int, list[int]] = {}
    for nid, c in assignment.labels.items():
        members.setdefault(c, []).append(nid)
    nonempty = sorted(members)
    if len(nonempty) < 2:
        raise ValueError("need at least two nonempty clusters to sample endpoints")
    rng = random.Random(seed)
    ca, cb = rng.sample(nonempty, 2)
    return rng.choice(sorted(members[ca])), rng.choice(sorted(members[cb]))


def shortest_route(graph: CityGraph, source: int, destination: int) -> Route:
    """A* over edge lengths with the geodesic distance-to-goal heuristic.

    The heuristic is admissible because every edge is at least as long as
    the great-circle distance between its endpoints.
    """
    if source not in graph.nodes or destination not in graph.nodes:
        raise KeyError("endpoints must be graph nodes")
    if source == destination:
        return Route((source,), 0.0, (source,), (0.0,))

    goal = graph.geo(destination)
    dist: dict[int, float] = {source: 0.0}
    parent: dict[int, int] = {}
    counter = 0  # heap tie-breaker keeps expansion order deterministic
    frontier: list[tuple[float, int, int]] = [(geodesic_distance(graph.geo(source), goal), 0, source)]
    closed: set[int] = set()
    while frontier:
        _, _, node = heapq.heappop(frontier)
        if node in closed:
            continue
        if node == destination:
            break
        closed.add(node)
        for e in graph.edges_from(node):
            g = dist[node] + e.length
            if g < dist.get(e.to_id, float("inf")):
                dist[e.to_id] = g
                parent[e.to_id] = node
                counter += 1
                h = geodesic_distance(graph.geo(e.to_id), goal)
                heapq.heappush(frontier, (g + h, counter, e.to_id))
    if destination not in dist:
        raise UnreachableError(f"node {destination} unreachable from {source}")

    path = [destination]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    return route_from_nodes(graph, path)


def route_to_dict(route: Route) -> dict:
    return {
        "nodes": list(route.node_ids),
        "landmarks": list(route.landmark_ids),
        "length_m": route.total_length,
    }


def route_from_dict(graph: CityGraph, raw: dict) -> Route:
    route = route_from_nodes(graph, [int(n) for n in raw["nodes"]])
    marks = [int(n) for n in raw.get("landmarks", ())]
    if len(marks) > 2:
        route = with_landmarks(route, marks[1:-1])
    return route


def save_route(route: Route, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(route_to_dict(route), f)
        f.write("\n")


def load_route(graph: CityGraph, path: str | Path) -> Route:
    with open(path, encoding="utf-8") as f:
        return route_from_dict(graph, json.load(f))
