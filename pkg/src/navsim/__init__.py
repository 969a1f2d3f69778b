"""navsim: desk-scale simulator for long-range vision-and-language
navigation on city road graphs."""

from .citygraph import (
    CityGraph,
    DirectedEdge,
    GeoPoint,
    GraphNode,
    geodesic_distance,
    initial_bearing,
    load_graph,
    save_graph,
)
from .engine import AgentBundle, Environment, Episode, EpisodeConfig, run_episode
from .evaluation import EpisodeResult, MetricsReport, spl, subsample_difficulty, summarize
from .instruction import SegmentedInstruction, Token, attend, attention_weights, group_tokens
from .memory import MemoryImage, append_point, featurize, init_memory
from .routegen import Route, cluster_nodes, sample_endpoints, shortest_route
from .synthworld import WorldSpec, generate_episode, generate_world

__version__ = "0.1.0"

__all__ = [
    "AgentBundle", "CityGraph", "DirectedEdge", "Environment", "Episode",
    "EpisodeConfig", "EpisodeResult", "GeoPoint", "GraphNode", "MemoryImage",
    "MetricsReport", "Route", "SegmentedInstruction", "Token", "WorldSpec",
    "append_point", "attend", "attention_weights", "cluster_nodes", "featurize",
    "generate_episode", "generate_world", "geodesic_distance", "group_tokens",
    "init_memory", "initial_bearing", "load_graph", "run_episode",
    "sample_endpoints", "save_graph", "shortest_route", "spl",
    "subsample_difficulty", "summarize",
]
