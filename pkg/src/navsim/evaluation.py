"""Episode metrics and cross-difficulty sub-sampling.

SPL is the success rate weighted by normalized inverse path length:
100 * mean(S_i * l_i / max(p_i, l_i)). Navigation error and total steps
average over all episodes, including failures (a successful-only average
cannot produce the step counts baselines report for near-zero SPL
policies).
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import SUCCESS, TrajectoryLog
from .instruction import SegmentedInstruction
from .routegen import Route

SUBSAMPLE_SOURCE_PAIRS = 4  # parent routes carry exactly this many segment pairs


@dataclass(frozen=True)
class EpisodeResult:
    success: int  # 1 or 0
    shortest_length: float
    traveled: float
    final_error: float
    steps: int

    def __post_init__(self):
        if self.success not in (0, 1):
            raise ValueError("success must be 0 or 1")
        if self.shortest_length <= 0:
            raise ValueError("shortest length must be positive")
        if self.traveled < 0:
            raise ValueError("traveled must be nonnegative")


@dataclass(frozen=True)
class MetricsReport:
    spl: float  # percent
    nav_error: float  # meters, mean over all episodes
    total_steps: float  # mean over all episodes
    n: int

    def to_dict(self) -> dict:
        return {"spl": self.spl, "nav_error": self.nav_error,
                "total_steps": self.total_steps, "n": self.n}


def result_from_log(log: TrajectoryLog) -> EpisodeResult:
    return EpisodeResult(
        success=1 if log.outcome == SUCCESS else 0,
        # a degenerate zero-length route still needs l > 0 for the SPL ratio
        shortest_length=max(log.shortest_length, 1e-9),
        traveled=log.traveled,
        final_error=log.final_distance_to_goal,
        steps=log.steps,
    )


def spl(results: list[EpisodeResult]) -> float:
    """Success weighted by normalized inverse path length, in percent."""
    if not results:
        raise ValueError("spl needs at least one episode")
    total = sum(
        r.success * r.shortest_length / max(r.traveled, r.shortest_length)
        for r in results
    )
    return 100.0 * total / len(results)


def summarize(results: list[EpisodeResult]) -> MetricsReport:
    if not results:
        raise ValueError("cannot summarize zero episodes")
    return MetricsReport(
        spl=spl(results),
        nav_error=sum(r.final_error for r in results) / len(results),
        total_steps=sum(r.steps for r in results) / len(results),
        n=len(results),
    )


def subsample_difficulty(route: Route, instr: SegmentedInstruction,
                         level: int) -> list[tuple[Route, SegmentedInstruction]]:
    """All contiguous windows of `level` landmarks from a 4-pair route.

    A 4-landmark route yields four 1-landmark, three 2-landmark and two
    3-landmark sub-routes. Window i spans boundary nodes i..i+level of
    [source, lm1, lm2, lm3, destination] and carries the matching segment
    pairs and correspondences.
    """
    pairs = instr.num_pairs
    if pairs != SUBSAMPLE_SOURCE_PAIRS:
        raise ValueError(f"expected a route with {SUBSAMPLE_SOURCE_PAIRS} segment pairs, got {pairs}")
    if len(route.landmark_ids) != SUBSAMPLE_SOURCE_PAIRS + 1:
        raise ValueError("route landmarks must be source + 3 intermediates + destination")
    if not 1 <= level <= 3:
        raise ValueError("level must be 1, 2 or 3")

    pos = route.positions()
    boundaries = [pos[n] for n in route.landmark_ids]
    out: list[tuple[Route, SegmentedInstruction]] = []
    for i in range(SUBSAMPLE_SOURCE_PAIRS - level + 1):
        lo, hi = boundaries[i], boundaries[i + level]
        nodes = route.node_ids[lo:hi + 1]
        base = route.cum_dists[lo]
        cum = tuple(d - base for d in route.cum_dists[lo:hi + 1])
        marks = route.landmark_ids[i:i + level + 1]
        sub_route = Route(nodes, cum[-1], marks, cum)
        sub_pairs = instr.pairs[i:i + level]
        text = " ".join(
            t.text for p in sub_pairs for t in (*p.landmark_tokens, *p.direction_tokens)
        )
        corr = instr.landmark_node_ids[i:i + level] if instr.landmark_node_ids else ()
        out.append((sub_route, SegmentedInstruction(sub_pairs, text, corr)))
    return out


def concat_window_nodes(windows: list[tuple[Route, SegmentedInstruction]]) -> list[int]:
    """Tiles consecutive windows back into one node sequence (shared
    boundary landmarks appear once)."""
    nodes: list[int] = []
    for route, _ in windows:
        nodes.extend(route.node_ids if not nodes else route.node_ids[1:])
    return nodes
