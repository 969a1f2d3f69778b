"""Deterministic episode loop.

One step is either a landmark acknowledgment or a move, never both:

1. attend the instruction at eta -> (landmark, direction) features
2. score the observation and the memory against them -> (s1, s2)
3. run the indicator controller. On a fire the attention advances and the
   memory reinitializes at the current position; if no pairs remain the
   episode terminates (success iff the destination lies within the
   threshold). The agent does not move on a fire step.
4. otherwise both policy heads predict, the predictions fuse with weights
   from (s1, s2), the closest road to the fused argmax angle is taken,
   and the memory extends to the new position.

Budget failures: running out of steps, or traveling past 130% of the
ground-truth route length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .action import (
    FixedBinPolicy,
    OraclePolicy,
    Policy,
    RandomPolicy,
    WeightingFn,
    bin_center,
    default_weighting,
    fuse,
    select_edge,
)
from .citygraph import CityGraph, geodesic_distance
from .instruction import (
    DEFAULT_EMBED_DIM,
    AttentionState,
    SegmentedInstruction,
    advance,
    attend_features,
    embed_pairs,
)
from .matching import (
    ControllerState,
    CosineMatcher,
    IndicatorController,
    Matcher,
    MemoryFeature,
    NeutralMatcher,
    ObservationFeature,
    OracleMatcher,
    ScoreFeature,
    ThresholdController,
    controller_step,
    score_pair,
)
from .memory import MemoryImage, append_point, featurize, init_memory, reset_at_landmark
from .routegen import Route

RUNNING = "running"
SUCCESS = "success"
FAILURE_WRONG_STOP = "failure:wrong_stop"
FAILURE_BUDGET = "failure:budget"


class EpisodeFinishedError(RuntimeError):
    """step() was called on a terminal episode."""


@dataclass(frozen=True)
class EpisodeConfig:
    dest_threshold_m: float = 100.0
    budget_fraction: float = 0.30
    max_steps: int = 60

    def __post_init__(self):
        if self.dest_threshold_m <= 0:
            raise ValueError("destination threshold must be positive")
        if self.budget_fraction < 0:
            raise ValueError("budget fraction must be nonnegative")


@dataclass
class Environment:
    """Shared read-only world: road graph plus per-node observation vectors."""

    graph: CityGraph
    features: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def feature_dim(self) -> int:
        if not self.features:
            return DEFAULT_EMBED_DIM
        return len(next(iter(self.features.values())))

    def observation(self, node_id: int) -> np.ndarray:
        vec = self.features.get(node_id)
        return vec if vec is not None else np.zeros(self.feature_dim)


@dataclass
class AgentBundle:
    policy: Policy
    visual_matcher: Matcher
    memory_matcher: Matcher
    controller: IndicatorController
    weighting: WeightingFn = default_weighting


@dataclass
class EpisodeState:
    node: int
    heading: float
    attention: AttentionState
    memory: MemoryImage
    steps: int = 0
    traveled: float = 0.0
    done: str = RUNNING
    controller_state: ControllerState = field(default_factory=ControllerState)


@dataclass
class TrajectoryLog:
    route_id: str
    seed: int | None
    nodes: list[int]
    records: list[dict]
    outcome: str
    final_distance_to_goal: float
    shortest_length: float
    traveled: float
    steps: int

    @property
    def spl_contribution(self) -> float:
        """Per-episode SPL term S * l / max(p, l), in [0, 1]."""
        if self.outcome != SUCCESS:
            return 0.0
        if self.shortest_length == 0:
            return 1.0
        return self.shortest_length / max(self.traveled, self.shortest_length)

    def summary(self) -> dict:
        return {
            "summary": {
                "route_id": self.route_id,
                "seed": self.seed,
                "nodes": self.nodes,
                "outcome": self.outcome,
                "final_distance_to_goal": self.final_distance_to_goal,
                "shortest_length": self.shortest_length,
                "traveled": self.traveled,
                "steps": self.steps,
                "spl_contribution": self.spl_contribution,
            }
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(r, separators=(",", ":")) for r in self.records]
        lines.append(json.dumps(self.summary(), separators=(",", ":")))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> TrajectoryLog:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not rows or "summary" not in rows[-1]:
            raise ValueError("trajectory log must end with a summary record")
        s = rows[-1]["summary"]
        return cls(
            route_id=s["route_id"], seed=s.get("seed"), nodes=list(s["nodes"]),
            records=rows[:-1], outcome=s["outcome"],
            final_distance_to_goal=s["final_distance_to_goal"],
            shortest_length=s["shortest_length"], traveled=s["traveled"],
            steps=s["steps"],
        )


class Episode:
    """Owns one episode's mutable state; the environment stays shared."""

    def __init__(self, env: Environment, route: Route, instr: SegmentedInstruction,
                 cfg: EpisodeConfig | None = None):
        self.env = env
        self.route = route
        self.instr = instr
        self.cfg = cfg or EpisodeConfig()
        self.pair_features = embed_pairs(instr, dim=env.feature_dim)
        self.records: list[dict] = []
        self.visited: list[int] = []
        self.state = self.reset()

    def reset(self) -> EpisodeState:
        route, graph = self.route, self.env.graph
        if route.source not in graph.nodes:
            raise ValueError(f"route source {route.source} not in graph")
        heading = 0.0
        if len(route.node_ids) > 1:
            heading = graph.edge_between(route.node_ids[0], route.node_ids[1]).bearing
        self.state = EpisodeState(
            node=route.source,
            heading=heading,
            attention=AttentionState(eta=1.0, num_pairs=self.instr.num_pairs),
            memory=init_memory(graph.geo(route.source)),
        )
        self.records = []
        self.visited = [route.source]
        return self.state

    @property
    def budget_m(self) -> float:
        return (1.0 + self.cfg.budget_fraction) * self.route.total_length

    def distance_to_goal(self) -> float:
        graph = self.env.graph
        return geodesic_distance(graph.geo(self.state.node), graph.geo(self.route.destination))

    def _attended_inputs(self, bundle: AgentBundle):
        """Attention readout, features and matcher scores for this step."""
        st = self.state
        landmark_f, direction_f = attend_features(
            self.pair_features, st.attention.eta, self.instr)
        obs = ObservationFeature(self.env.observation(st.node),
                                 node_id=st.node, heading=st.heading)
        mem_f = MemoryFeature(featurize(st.memory), node_id=st.node, heading=st.heading)
        s = ScoreFeature(
            score_pair(bundle.visual_matcher, obs, landmark_f),
            score_pair(bundle.memory_matcher, mem_f, direction_f),
        )
        return obs, mem_f, landmark_f, direction_f, s

    def peek_decision(self, bundle: AgentBundle) -> int:
        """The controller decision the next step would take; no mutation."""
        if self.state.done != RUNNING or self.state.steps >= self.cfg.max_steps:
            return 0
        *_, s = self._attended_inputs(bundle)
        decision, _ = bundle.controller.step(s, self.state.controller_state)
        return decision

    def step(self, bundle: AgentBundle) -> dict:
        st = self.state
        if st.done != RUNNING:
            raise EpisodeFinishedError(f"episode already {st.done}")

        record: dict = {
            "step": st.steps, "node": st.node, "heading": st.heading,
            "eta": st.attention.eta,
        }
        if st.steps >= self.cfg.max_steps:
            st.done = FAILURE_BUDGET
            record.update(s1=None, s2=None, phi=None, moved_to=None,
                          traveled=st.traveled, outcome=st.done)
            self.records.append(record)
            return record

        obs, mem_f, landmark_f, direction_f, s = self._attended_inputs(bundle)
        phi, st.controller_state = controller_step(bundle.controller, s, st.controller_state)
        record.update(s1=s.s1, s2=s.s2, phi=phi)

        if phi == 1:
            st.attention = advance(st.attention, 1)
            st.steps += 1
            record.update(moved_to=None, fused=None, eta_after=st.attention.eta)
            if st.attention.exhausted:
                st.done = SUCCESS if self.distance_to_goal() <= self.cfg.dest_threshold_m \
                    else FAILURE_WRONG_STOP
            else:
                st.memory = reset_at_landmark(st.memory, self.env.graph.geo(st.node))
            record.update(traveled=st.traveled, outcome=st.done)
            self.records.append(record)
            return record

        ae = bundle.policy.act_visual(obs, landmark_f)
        am = bundle.policy.act_memory(mem_f, direction_f)
        fused = fuse(ae, am, bundle.weighting(s))
        edge = select_edge(self.env.graph, st.node,
                           bin_center(fused.argmax_bin()), st.heading)
        st.node = edge.to_id
        st.heading = edge.bearing
        st.traveled += edge.length
        st.steps += 1
        append_point(st.memory, self.env.graph.geo(st.node))
        self.visited.append(st.node)
        if st.traveled > self.budget_m:
            st.done = FAILURE_BUDGET
        record.update(moved_to=st.node, edge_bearing=edge.bearing,
                      edge_length=edge.length, fused=list(fused.probs),
                      eta_after=st.attention.eta, traveled=st.traveled, outcome=st.done)
        self.records.append(record)
        return record

    def run(self, bundle: AgentBundle, route_id: str = "", seed: int | None = None
            ) -> TrajectoryLog:
        while self.state.done == RUNNING:
            self.step(bundle)
        return TrajectoryLog(
            route_id=route_id, seed=seed, nodes=list(self.visited),
            records=list(self.records), outcome=self.state.done,
            final_distance_to_goal=self.distance_to_goal(),
            shortest_length=self.route.total_length,
            traveled=self.state.traveled, steps=self.state.steps,
        )


def make_bundle(mode: str, env: Environment, seed: int | None = None,
                theta: float = 0.5, min_steps_between_fires: int = 1) -> AgentBundle:
    """Reference bundles: oracle (ground truth), random (seeded walk with
    ground-truth landmark detection), cosine (label-free demo)."""
    controller = ThresholdController(theta, min_steps_between_fires)
    if mode == "oracle":
        return AgentBundle(OraclePolicy(env.graph), OracleMatcher(), OracleMatcher(), controller)
    if mode == "random":
        return AgentBundle(RandomPolicy(seed or 0), OracleMatcher(), OracleMatcher(), controller)
    if mode == "cosine":
        return AgentBundle(OraclePolicy(env.graph), CosineMatcher(), NeutralMatcher(), controller)
    raise ValueError(f"unknown bundle mode {mode!r}")


def run_episode(env: Environment, route: Route, instr: SegmentedInstruction,
                bundle: AgentBundle, cfg: EpisodeConfig | None = None,
                seed: int | None = None, route_id: str = "") -> TrajectoryLog:
    return Episode(env, route, instr, cfg).run(bundle, route_id=route_id, seed=seed)


def validate_log(env: Environment, route: Route, cfg: EpisodeConfig,
                 log: TrajectoryLog) -> list[str]:
    """Replay-style consistency check; returns violations (empty = valid)."""
    problems: list[str] = []
    graph = env.graph
    for a, b in zip(log.nodes, log.nodes[1:]):
        if graph.edge_between(a, b) is None:
            problems.append(f"traversed non-edge {a}->{b}")
    traveled = 0.0
    for a, b in zip(log.nodes, log.nodes[1:]):
        e = graph.edge_between(a, b)
        if e is not None:
            traveled += e.length
    if abs(traveled - log.traveled) > 1e-6:
        problems.append(f"traveled mismatch: recorded {log.traveled}, recomputed {traveled}")
    eta = 1.0
    for r in log.records:
        if r.get("eta") is not None and r["eta"] < eta - 1e-12:
            problems.append(f"eta decreased at step {r['step']}")
        if r.get("phi") == 1 and r.get("eta_after") != r["eta"] + 1:
            problems.append(f"fire at step {r['step']} did not advance eta by 1")
        if r.get("phi") == 0 and r.get("eta_after") != r["eta"]:
            problems.append(f"eta changed without a fire at step {r['step']}")
        eta = max(eta, r.get("eta_after") or r["eta"])
    if log.steps > cfg.max_steps:
        problems.append(f"steps {log.steps} exceed max {cfg.max_steps}")
    if log.outcome == SUCCESS:
        final = geodesic_distance(graph.geo(log.nodes[-1]), graph.geo(route.destination))
        if final > cfg.dest_threshold_m:
            problems.append(f"success recorded {final:.1f} m from the goal")
    if log.records and log.records[-1].get("outcome") == RUNNING:
        problems.append("log ends while still running")
    return problems


__all__ = [
    "AgentBundle", "Environment", "Episode", "EpisodeConfig", "EpisodeFinishedError",
    "EpisodeState", "FixedBinPolicy", "TrajectoryLog", "make_bundle", "run_episode",
    "validate_log", "RUNNING", "SUCCESS", "FAILURE_WRONG_STOP", "FAILURE_BUDGET",
]
