"""Landmark mining along a route.

Selects l interior nodes maximizing a weighted sum of three terms:
spread (minimum along-route gap between consecutive picks, endpoints
included), intersection proximity (mean of 1/(d + sigma) with d the
along-route distance forward to the next intersection), and a pluggable
per-node rank score in [0, 1]. Greedy forward selection is the default
solver; exhaustive enumeration serves as the exact oracle on small
instances. The spread term is a max-min dispersion objective, so greedy
carries no approximation guarantee here; correctness is pinned against
the exact solver in tests.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Protocol

from .routegen import Route

EXACT_ENUMERATION_LIMIT = 10**6


class InstanceTooLargeError(ValueError):
    """Exhaustive enumeration would exceed the combination budget."""


@dataclass(frozen=True)
class ObjectiveWeights:
    w1: float = 1.0
    w2: float = 1.0
    w3: float = 3.0
    sigma: float = 15.0  # meters; keeps the intersection term finite at d = 0
    l: int = 3  # number of intermediate landmarks to select

    def __post_init__(self):
        if min(self.w1, self.w2, self.w3) < 0:
            raise ValueError("weights must be nonnegative")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.l < 1:
            raise ValueError("l must be at least 1")


class RankScorer(Protocol):
    def score(self, node_id: int) -> float:
        """Deterministic per-node score in [0, 1]."""
        ...


class HashScorer:
    """Deterministic pseudo-score derived from a salted hash of the node id."""

    def __init__(self, salt: int = 0):
        self.salt = salt

    def score(self, node_id: int) -> float:
        digest = hashlib.blake2b(f"{self.salt}:{node_id}".encode(), digest_size=8).digest()
        return int.from_bytes(digest, "big") / 2**64


class TableScorer:
    """Planted scores for synthetic worlds; unlisted nodes score 0."""

    def __init__(self, scores: dict[int, float]):
        self.scores = dict(scores)

    def score(self, node_id: int) -> float:
        return self.scores.get(node_id, 0.0)


@dataclass(frozen=True)
class Selection:
    node_ids: tuple[int, ...]  # sorted by node id
    objective_value: float


@dataclass
class _RouteView:
    """Precomputed along-route geometry shared by objective evaluations."""

    route: Route
    intersections: set[int]
    dist_at: dict[int, float] = field(init=False)
    ahead_dist: dict[int, float] = field(init=False)

    def __post_init__(self):
        self.dist_at = dict(zip(self.route.node_ids, self.route.cum_dists))
        # Distance from each route node forward to the nearest intersection,
        # scanning back from the destination; no intersection ahead falls
        # back to the remaining distance to the destination.
        self.ahead_dist = {}
        nodes, cum = self.route.node_ids, self.route.cum_dists
        next_at = cum[-1]
        for i in range(len(nodes) - 1, -1, -1):
            if nodes[i] in self.intersections:
                next_at = cum[i]
            self.ahead_dist[nodes[i]] = next_at - cum[i]


def _evaluate(view: _RouteView, selected: tuple[int, ...], weights: ObjectiveWeights,
              scorer: RankScorer) -> float:
    route = view.route
    marks = sorted(view.dist_at[n] for n in selected)
    stops = [0.0, *marks, route.total_length]
    f1 = min(b - a for a, b in zip(stops, stops[1:]))
    if selected:
        f2 = sum(1.0 / (view.ahead_dist[n] + weights.sigma) for n in selected) / len(selected)
        f3 = sum(scorer.score(n) for n in selected) / len(selected)
    else:
        f2 = f3 = 0.0
    return weights.w1 * f1 + weights.w2 * f2 + weights.w3 * f3


def _checked_view(route: Route, selection_nodes: tuple[int, ...] | None,
                  intersections: set[int]) -> _RouteView:
    interior = set(route.interior())
    if selection_nodes is not None:
        bad = [n for n in selection_nodes if n not in interior]
        if bad:
            raise ValueError(f"selection nodes {bad} are not interior route nodes")
    return _RouteView(route, intersections)


def objective(route: Route, selection: Selection, weights: ObjectiveWeights,
              scorer: RankScorer, intersections: set[int]) -> float:
    """Evaluates w1*f1 + w2*f2 + w3*f3 for an explicit selection."""
    view = _checked_view(route, selection.node_ids, intersections)
    return _evaluate(view, selection.node_ids, weights, scorer)


def select_greedy(route: Route, weights: ObjectiveWeights, scorer: RankScorer,
                  intersections: set[int]) -> Selection:
    """Forward greedy: adds the node with the best objective gain each step.

    Ties break toward the smallest node id. Deterministic.
    """
    view = _checked_view(route, None, intersections)
    candidates = sorted(route.interior())
    if len(candidates) < weights.l:
        raise ValueError(f"route interior has {len(candidates)} nodes, need {weights.l}")
    chosen: list[int] = []
    for _ in range(weights.l):
        best_node, best_value = None, -math.inf
        for n in candidates:
            if n in chosen:
                continue
            value = _evaluate(view, tuple(chosen) + (n,), weights, scorer)
            if value > best_value:
                best_node, best_value = n, value
        chosen.append(best_node)
    chosen.sort()
    return Selection(tuple(chosen), _evaluate(view, tuple(chosen), weights, scorer))


def select_exact(route: Route, weights: ObjectiveWeights, scorer: RankScorer,
                 intersections: set[int]) -> Selection:
    """Global optimum by subset enumeration; lexicographic tie-break.

    Refuses instances with more than 10^6 candidate subsets.
    """
    view = _checked_view(route, None, intersections)
    candidates = sorted(route.interior())
    if len(candidates) < weights.l:
        raise ValueError(f"route interior has {len(candidates)} nodes, need {weights.l}")
    if math.comb(len(candidates), weights.l) > EXACT_ENUMERATION_LIMIT:
        raise InstanceTooLargeError(
            f"C({len(candidates)}, {weights.l}) exceeds {EXACT_ENUMERATION_LIMIT}"
        )
    best: tuple[int, ...] | None = None
    best_value = -math.inf
    for subset in combinations(candidates, weights.l):
        value = _evaluate(view, subset, weights, scorer)
        if value > best_value:  # first-seen wins ties: combinations yield lexicographic order
            best, best_value = subset, value
    return Selection(best, best_value)
