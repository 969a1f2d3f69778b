"""Geo-referenced directed road graph: geodesic math, loading, validation.

Distances use a spherical Earth (mean radius 6,371,000 m) via the haversine
formula; at city scale the error against an ellipsoid is negligible.
Bearings are compass degrees: 0 = north, 90 = east, in [0, 360).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

EARTH_RADIUS_M = 6_371_000.0

# Stored edge bearings may deviate from the recomputed geodesic bearing by
# at most this much (degrees, circular).
BEARING_TOLERANCE_DEG = 2.0


class GraphError(ValueError):
    """Base class for graph loading/validation failures."""


class GraphValidationError(GraphError):
    """Raised when a graph violates structural invariants.

    Carries the full list of violations so callers see everything wrong
    with a file at once, not just the first offence.
    """

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid graph: " + "; ".join(violations))


class CoincidentPointsError(ValueError):
    """Bearing is undefined between two identical points."""


@dataclass(frozen=True)
class GeoPoint:
    """WGS-style coordinate pair, degrees. lat in [-90, 90], lon in [-180, 180)."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"non-finite coordinates ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon < 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180)")


@dataclass(frozen=True)
class GraphNode:
    id: int
    geo: GeoPoint
    panorama_ref: str | None = None


@dataclass(frozen=True)
class DirectedEdge:
    from_id: int
    to_id: int
    bearing: float  # degrees in [0, 360), geodesic initial bearing from -> to
    length: float  # meters, > 0


def geodesic_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters (haversine)."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def initial_bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Forward azimuth from a to b, degrees in [0, 360). Raises on a == b."""
    if a.lat == b.lat and a.lon == b.lon:
        raise CoincidentPointsError(f"bearing undefined for coincident points {a}")
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dlam = math.radians(b.lon - a.lon)
    x = math.sin(dlam) * math.cos(phi2)
    y = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlam)
    return (math.degrees(math.atan2(x, y)) + 360.0) % 360.0


def circular_diff_deg(a: float, b: float) -> float:
    """Smallest absolute angular difference between two headings, in [0, 180]."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


class CityGraph:
    """Immutable-after-load directed road graph.

    nodes: id -> GraphNode; adjacency: id -> outgoing DirectedEdges.
    Safe to share across threads once built.
    """

    def __init__(self, nodes: dict[int, GraphNode], adjacency: dict[int, list[DirectedEdge]]):
        self.nodes = nodes
        self.adjacency = {nid: list(adjacency.get(nid, ())) for nid in nodes}

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return sum(len(es) for es in self.adjacency.values())

    def geo(self, node_id: int) -> GeoPoint:
        return self.nodes[node_id].geo

    def edges_from(self, node_id: int) -> list[DirectedEdge]:
        return self.adjacency[node_id]

    def edge_between(self, from_id: int, to_id: int) -> DirectedEdge | None:
        for e in self.adjacency.get(from_id, ()):
            if e.to_id == to_id:
                return e
        return None

    def out_degree(self, node_id: int) -> int:
        return len(self.adjacency[node_id])

    def validate(self) -> list[str]:
        """Returns the list of invariant violations (empty when valid)."""
        violations: list[str] = []
        for nid, edges in self.adjacency.items():
            if nid not in self.nodes:
                violations.append(f"adjacency key {nid} is not a node")
                continue
            for e in edges:
                tag = f"edge {e.from_id}->{e.to_id}"
                if e.from_id != nid:
                    violations.append(f"{tag} stored under node {nid}")
                if e.to_id not in self.nodes:
                    violations.append(f"{tag} references missing node {e.to_id}")
                    continue
                if e.from_id == e.to_id:
                    violations.append(f"{tag} is a self-loop")
                    continue
                if e.length <= 0:
                    violations.append(f"{tag} has non-positive length {e.length}")
                if not 0.0 <= e.bearing < 360.0:
                    violations.append(f"{tag} bearing {e.bearing} outside [0, 360)")
                true_bearing = initial_bearing(self.nodes[e.from_id].geo, self.nodes[e.to_id].geo)
                if circular_diff_deg(e.bearing, true_bearing) > BEARING_TOLERANCE_DEG:
                    violations.append(
                        f"{tag} bearing {e.bearing:.2f} deviates from geodesic {true_bearing:.2f}"
                    )
        return violations


def build_graph(
    nodes: list[GraphNode],
    edges: list[tuple[int, int, float | None, float | None]],
) -> CityGraph:
    """Assembles and validates a CityGraph.

    Each edge is (from, to, bearing|None, length|None); missing bearing or
    length is computed from node geometry. Raises GraphValidationError with
    every violation found.
    """
    node_map: dict[int, GraphNode] = {}
    violations: list[str] = []
    for n in nodes:
        if n.id in node_map:
            violations.append(f"duplicate node id {n.id}")
        node_map[n.id] = n

    adjacency: dict[int, list[DirectedEdge]] = {nid: [] for nid in node_map}
    for from_id, to_id, bearing, length in edges:
        tag = f"edge {from_id}->{to_id}"
        if from_id not in node_map or to_id not in node_map:
            violations.append(f"{tag} references missing node")
            continue
        if from_id == to_id:
            violations.append(f"{tag} is a self-loop")
            continue
        a, b = node_map[from_id].geo, node_map[to_id].geo
        if bearing is None:
            try:
                bearing = initial_bearing(a, b)
            except CoincidentPointsError:
                violations.append(f"{tag} joins coincident points")
                continue
        if length is None:
            length = geodesic_distance(a, b)
        adjacency[from_id].append(DirectedEdge(from_id, to_id, bearing, length))

    graph = CityGraph(node_map, adjacency)
    violations.extend(graph.validate())
    if violations:
        raise GraphValidationError(violations)
    return graph


def load_graph(path: str | Path) -> CityGraph:
    """Loads and validates a graph file (see save_graph for the schema)."""
    with open(path, encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise GraphError(f"cannot parse {path}: {e}") from e
    try:
        nodes = [
            GraphNode(int(n["id"]), GeoPoint(float(n["lat"]), float(n["lon"])), n.get("pano"))
            for n in raw["nodes"]
        ]
        edges = [
            (
                int(e["from"]),
                int(e["to"]),
                None if e.get("bearing") is None else float(e["bearing"]),
                None if e.get("length") is None else float(e["length"]),
            )
            for e in raw["edges"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise GraphError(f"malformed graph file {path}: {e}") from e
    return build_graph(nodes, edges)


def graph_to_dict(graph: CityGraph) -> dict:
    """Canonical JSON form: nodes sorted by id, edges sorted by (from, to)."""
    return {
        "nodes": [
            {"id": n.id, "lat": n.geo.lat, "lon": n.geo.lon, "pano": n.panorama_ref}
            for n in sorted(graph.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {"from": e.from_id, "to": e.to_id, "bearing": e.bearing, "length": e.length}
            for nid in sorted(graph.adjacency)
            for e in sorted(graph.adjacency[nid], key=lambda e: (e.from_id, e.to_id))
        ],
    }


def save_graph(graph: CityGraph, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(graph_to_dict(graph), f, indent=1)
        f.write("\n")


def find_intersections(graph: CityGraph) -> set[int]:
    """Nodes where roads meet: out-degree >= 3."""
    return {nid for nid in graph.nodes if graph.out_degree(nid) >= 3}
