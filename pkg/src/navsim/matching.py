"""Matching scores and the landmark-reached indicator.

Two scores per step: s1 compares the visual observation against the
attended landmark description, s2 compares the memory image against the
attended directional instruction. A controller turns (s1, s2) into the
binary reached/not-reached decision that advances the attention.

Learned matchers are out of scope; two references ship instead: an oracle
that consults ground-truth correspondence (for end-to-end tests) and a
cosine matcher over feature vectors (to run the pipeline without labels).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .instruction import SegmentFeature


class DimensionMismatchError(ValueError):
    """Feature and segment vectors disagree in length."""


@dataclass
class ObservationFeature:
    """Panorama stand-in for the current node.

    node_id/heading are carried alongside the vector so oracle components
    can consult ground truth without a separate channel.
    """

    vector: np.ndarray
    node_id: int | None = None
    heading: float | None = None


@dataclass
class MemoryFeature:
    vector: np.ndarray
    node_id: int | None = None
    heading: float | None = None


@dataclass(frozen=True)
class ScoreFeature:
    s1: float
    s2: float

    def __post_init__(self):
        if not (0.0 <= self.s1 <= 1.0 and 0.0 <= self.s2 <= 1.0):
            raise ValueError(f"scores must lie in [0, 1], got ({self.s1}, {self.s2})")


class Matcher(Protocol):
    def score(self, feature, segment: SegmentFeature) -> float: ...


class OracleMatcher:
    """Ground-truth lookup: 1.0 exactly at the aimed landmark node."""

    def score(self, feature, segment: SegmentFeature) -> float:
        if feature.node_id is None or segment.aimed_node_id is None:
            return 0.0
        return 1.0 if feature.node_id == segment.aimed_node_id else 0.0


class NeutralMatcher:
    """Constant 0.5: a stand-in where no comparable representation exists
    (e.g. raster memory vs. text without a trained cross-modal model)."""

    def score(self, feature, segment: SegmentFeature) -> float:
        return 0.5


class CosineMatcher:
    """Cosine similarity mapped into [0, 1] via (cos + 1) / 2."""

    def score(self, feature, segment: SegmentFeature) -> float:
        a = np.asarray(feature.vector, dtype=np.float64)
        b = np.asarray(segment.vector, dtype=np.float64)
        if a.shape != b.shape:
            raise DimensionMismatchError(f"feature {a.shape} vs segment {b.shape}")
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        cos = 0.0 if na == 0 or nb == 0 else float(np.dot(a, b) / (na * nb))
        return min(1.0, max(0.0, (cos + 1.0) / 2.0))


def score_pair(matcher: Matcher, feature, segment: SegmentFeature) -> float:
    """Runs a matcher and enforces the [0, 1] range contract."""
    s = matcher.score(feature, segment)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"matcher returned {s}, outside [0, 1]")
    return s


@dataclass(frozen=True)
class ControllerState:
    """steps_since_fire counts controller steps since the last 1-decision;
    None means the controller has never fired (always eligible)."""

    steps_since_fire: int | None = None


class IndicatorController(Protocol):
    def step(self, s: ScoreFeature, hidden: ControllerState) -> tuple[int, ControllerState]: ...


@dataclass
class ThresholdController:
    """Reference indicator: fire when min(s1, s2) >= theta, debounced.

    A fire is allowed only when at least min_steps_between_fires steps
    have passed since the previous fire. The paper's learned recurrent
    controller is out of scope; the thresholds stand in for it.
    """

    theta: float = 0.5
    min_steps_between_fires: int = 1

    def step(self, s: ScoreFeature, hidden: ControllerState) -> tuple[int, ControllerState]:
        elapsed = None if hidden.steps_since_fire is None else hidden.steps_since_fire + 1
        eligible = elapsed is None or elapsed >= self.min_steps_between_fires
        if eligible and min(s.s1, s.s2) >= self.theta:
            return 1, ControllerState(steps_since_fire=0)
        return 0, ControllerState(steps_since_fire=elapsed)


def controller_step(ctrl: IndicatorController, s: ScoreFeature,
                    hidden: ControllerState) -> tuple[int, ControllerState]:
    decision, new_hidden = ctrl.step(s, hidden)
    if decision not in (0, 1):
        raise ValueError(f"controller must return 0 or 1, got {decision}")
    return decision, new_hidden


_MATCHERS = {
    "oracle": OracleMatcher,
    "cosine": CosineMatcher,
    "neutral": NeutralMatcher,
}


def register_matcher(name: str, factory) -> None:
    _MATCHERS[name] = factory


def matcher_from_config(name: str) -> Matcher:
    try:
        return _MATCHERS[name]()
    except KeyError:
        raise ValueError(f"unknown matcher {name!r}; known: {sorted(_MATCHERS)}") from None
