"""Eight-direction action space, adaptive fusion, and angle-to-road matching.

Action distributions live over 8 bins centered at i*45 degrees with
+/-22.5 degree extent. Predicted angles are agent-frame (relative to the
current heading) and get converted to world frame before choosing the
outgoing road with minimum circular distance. Stop is not a ninth bin:
the engine stops implicitly when the indicator fires with no segment
pairs left.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Protocol

from .citygraph import CityGraph, DirectedEdge, circular_diff_deg, initial_bearing
from .instruction import SegmentFeature
from .matching import MemoryFeature, ObservationFeature, ScoreFeature

NUM_BINS = 8
BIN_DEGREES = 360.0 / NUM_BINS
NORMALIZATION_TOL = 1e-9

COMPASS_NAMES = ("north", "northeast", "east", "southeast",
                 "south", "southwest", "west", "northwest")


class IsolatedNodeError(ValueError):
    """The node has no outgoing edges to act on."""


@dataclass(frozen=True)
class ActionDistribution:
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != NUM_BINS:
            raise ValueError(f"need {NUM_BINS} probabilities, got {len(self.probs)}")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probabilities sum to {sum(self.probs)}, not 1")

    @classmethod
    def delta(cls, bin_index: int) -> ActionDistribution:
        probs = [0.0] * NUM_BINS
        probs[bin_index] = 1.0
        return cls(tuple(probs))

    @classmethod
    def uniform(cls) -> ActionDistribution:
        return cls((1.0 / NUM_BINS,) * NUM_BINS)

    def argmax_bin(self) -> int:
        return max(range(NUM_BINS), key=lambda i: (self.probs[i], -i))


@dataclass(frozen=True)
class FusionWeights:
    w0: float
    w1: float

    def __post_init__(self):
        if self.w0 < 0 or self.w1 < 0:
            raise ValueError("fusion weights must be nonnegative")
        if self.w0 + self.w1 == 0:
            raise ValueError("fusion weights must not both be zero")


def fuse(ae: ActionDistribution, am: ActionDistribution, w: FusionWeights) -> ActionDistribution:
    """Adaptive average (w0*ae + w1*am) / (w0 + w1)."""
    total = w.w0 + w.w1
    return ActionDistribution(tuple(
        (w.w0 * pe + w.w1 * pm) / total for pe, pm in zip(ae.probs, am.probs)
    ))


def bin_of_angle(angle: float) -> int:
    """Bin i covers [i*45 - 22.5, i*45 + 22.5), half-open upward, mod 360."""
    return int(((angle % 360.0) + BIN_DEGREES / 2.0) // BIN_DEGREES) % NUM_BINS


def bin_center(bin_index: int) -> float:
    return bin_index * BIN_DEGREES


def select_edge(graph: CityGraph, node: int, predicted_angle: float,
                heading: float) -> DirectedEdge:
    """Picks the outgoing road closest (circularly) to the predicted angle.

    predicted_angle is agent-frame; ties break toward the smaller absolute
    bearing.
    """
    edges = graph.edges_from(node)
    if not edges:
        raise IsolatedNodeError(f"node {node} has no outgoing edges")
    world = (heading + predicted_angle) % 360.0
    return min(edges, key=lambda e: (circular_diff_deg(e.bearing, world), e.bearing))


class Policy(Protocol):
    def act_visual(self, obs: ObservationFeature, landmark: SegmentFeature) -> ActionDistribution: ...

    def act_memory(self, mem: MemoryFeature, direction: SegmentFeature) -> ActionDistribution: ...


class OraclePolicy:
    """Bearing-greedy oracle: all mass on the bin pointing at the aimed
    ground-truth landmark. Both heads emit the same answer."""

    def __init__(self, graph: CityGraph):
        self.graph = graph

    def _aim(self, node_id: int | None, heading: float | None,
             target_id: int | None) -> ActionDistribution:
        if node_id is None or heading is None or target_id is None or node_id == target_id:
            return ActionDistribution.delta(0)
        bearing = initial_bearing(self.graph.geo(node_id), self.graph.geo(target_id))
        return ActionDistribution.delta(bin_of_angle(bearing - heading))

    def act_visual(self, obs: ObservationFeature, landmark: SegmentFeature) -> ActionDistribution:
        return self._aim(obs.node_id, obs.heading, landmark.aimed_node_id)

    def act_memory(self, mem: MemoryFeature, direction: SegmentFeature) -> ActionDistribution:
        return self._aim(mem.node_id, mem.heading, direction.aimed_node_id)


class RandomPolicy:
    """Seeded uniform-random bin choice; each head draws independently."""

    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def act_visual(self, obs: ObservationFeature, landmark: SegmentFeature) -> ActionDistribution:
        return ActionDistribution.delta(self.rng.randrange(NUM_BINS))

    def act_memory(self, mem: MemoryFeature, direction: SegmentFeature) -> ActionDistribution:
        return ActionDistribution.delta(self.rng.randrange(NUM_BINS))


class FixedBinPolicy:
    """Emits one externally chosen bin; used for human-driven sessions."""

    def __init__(self, bin_index: int = 0):
        self.bin_index = bin_index

    def act_visual(self, obs: ObservationFeature, landmark: SegmentFeature) -> ActionDistribution:
        return ActionDistribution.delta(self.bin_index)

    def act_memory(self, mem: MemoryFeature, direction: SegmentFeature) -> ActionDistribution:
        return ActionDistribution.delta(self.bin_index)


WeightingFn = Callable[[ScoreFeature], FusionWeights]


def default_weighting(s: ScoreFeature) -> FusionWeights:
    """w = (s1, s2); falls back to equal trust when both scores are zero
    (the learned FC mapping the scores feed in the full system is out of
    scope)."""
    if s.s1 == 0.0 and s.s2 == 0.0:
        return FusionWeights(0.5, 0.5)
    return FusionWeights(s.s1, s.s2)


_POLICIES = {
    "oracle": OraclePolicy,
    "random": RandomPolicy,
}


def register_policy(name: str, factory) -> None:
    _POLICIES[name] = factory


def policy_from_config(name: str, **kwargs) -> Policy:
    try:
        return _POLICIES[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; known: {sorted(_POLICIES)}") from None
