import math

import numpy as np
import pytest

from navsim.citygraph import CityGraph, GeoPoint, GraphNode, build_graph
from navsim.synthworld import WorldSpec, generate_world


def random_geo_graph(seed: int, n_nodes: int, k_neighbors: int = 3,
                     extent_deg: float = 0.02) -> CityGraph:
    """Seeded planar-ish graph: nodes scattered near NYC, each linked
    bidirectionally to its k nearest neighbors."""
    rng = np.random.default_rng(seed)
    lats = 40.7 + rng.uniform(0, extent_deg, size=n_nodes)
    lons = -74.0 + rng.uniform(0, extent_deg, size=n_nodes)
    nodes = [GraphNode(i, GeoPoint(float(lats[i]), float(lons[i]))) for i in range(n_nodes)]
    edges = set()
    coords = np.column_stack([lats, lons])
    for i in range(n_nodes):
        d2 = ((coords - coords[i]) ** 2).sum(axis=1)
        d2[i] = np.inf
        for j in np.argpartition(d2, k_neighbors)[:k_neighbors]:
            edges.add((i, int(j)))
            edges.add((int(j), i))
    return build_graph(nodes, [(a, b, None, None) for a, b in sorted(edges)])


def dijkstra_length(graph: CityGraph, source: int, destination: int) -> float | None:
    """Independent shortest-path oracle (no heuristic, separate code path)."""
    import heapq

    dist = {source: 0.0}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == destination:
            return d
        for e in graph.adjacency[node]:
            nd = d + e.length
            if nd < dist.get(e.to_id, math.inf):
                dist[e.to_id] = nd
                heapq.heappush(heap, (nd, e.to_id))
    return None


@pytest.fixture(scope="session")
def grid_world():
    return generate_world(WorldSpec())


@pytest.fixture(scope="session")
def grid_graph(grid_world):
    return grid_world.graph
