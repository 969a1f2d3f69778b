"""Session-oriented HTTP interface over the episode engine.

Endpoints (JSON over HTTP/1.1, errors as {"error": ...}):

    POST /sessions                      {dataset, route, mode} -> 201
    GET  /sessions/{id}/observation
    POST /sessions/{id}/action          {bin: 0..7}   (human mode only)
    GET  /sessions/{id}/log
    GET  /datasets
    GET  /datasets/{id}/routes

Sessions live in an in-memory store with TTL eviction; per-session
requests serialize on a lock, so concurrent sessions never share state.
Human mode steers with direction bins while ground-truth matchers drive
the landmark indicator; oracle/random modes run their episode to
completion at creation time and are read-only afterwards.
"""

from __future__ import annotations

import base64
import json
import re
import secrets
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .action import NUM_BINS, FixedBinPolicy
from .engine import (
    RUNNING,
    AgentBundle,
    Episode,
    Environment,
    TrajectoryLog,
    make_bundle,
)
from .instruction import attention_weights
from .matching import OracleMatcher, ThresholdController
from .memory import png_bytes
from .synthworld import Dataset, load_dataset

DEFAULT_PORT = 8080
SESSION_TTL_S = 3600.0
MODES = ("human", "oracle", "random", "cosine")

# An act() resolves pending landmark acknowledgments around the human's
# move; a bound keeps a stuck controller from looping.
_MAX_AUTO_FIRES = 8


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


@dataclass
class Session:
    id: str
    dataset_id: str
    route_id: str
    mode: str
    episode: Episode
    bundle: AgentBundle
    seed: int | None
    created_at: float = field(default_factory=time.monotonic)
    last_used: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)
    finished_log: TrajectoryLog | None = None

    def touch(self):
        self.last_used = time.monotonic()


class SessionStore:
    def __init__(self, datasets: dict[str, Dataset], ttl_s: float = SESSION_TTL_S,
                 log_dir: Path | None = None):
        self.datasets = datasets
        self.envs = {
            name: Environment(ds.graph, ds.features) for name, ds in datasets.items()
        }
        self.ttl_s = ttl_s
        self.log_dir = log_dir
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def _evict_expired(self) -> None:
        now = time.monotonic()
        dead = [sid for sid, s in self.sessions.items() if now - s.last_used > self.ttl_s]
        for sid in dead:
            del self.sessions[sid]

    def create(self, dataset_id: str, route_id: str, mode: str,
               seed: int | None = None) -> Session:
        if mode not in MODES:
            raise ApiError(400, f"invalid mode {mode!r}; expected one of {MODES}")
        ds = self.datasets.get(dataset_id)
        if ds is None:
            raise ApiError(404, f"unknown dataset {dataset_id!r}")
        ep = ds.episodes.get(route_id)
        if ep is None:
            raise ApiError(404, f"unknown route {route_id!r} in dataset {dataset_id!r}")

        env = self.envs[dataset_id]
        episode = Episode(env, ep.route, ep.instruction)
        if mode == "human":
            bundle = AgentBundle(FixedBinPolicy(), OracleMatcher(), OracleMatcher(),
                                 ThresholdController())
        else:
            bundle = make_bundle(mode, env, seed=seed)
        session = Session(
            id=secrets.token_urlsafe(16), dataset_id=dataset_id, route_id=route_id,
            mode=mode, episode=episode, bundle=bundle, seed=seed,
        )
        if mode != "human":
            session.finished_log = episode.run(bundle, route_id=route_id, seed=seed)
        with self._lock:
            self._evict_expired()
            self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            self._evict_expired()
            session = self.sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        session.touch()
        return session


def _observation_payload(session: Session) -> dict:
    ep = session.episode
    st = ep.state
    graph = ep.env.graph
    weights = attention_weights(min(st.attention.eta, float(ep.instr.num_pairs)),
                                ep.instr.num_pairs)
    pairs = [
        {
            "landmark": " ".join(t.text for t in p.landmark_tokens),
            "direction": " ".join(t.text for t in p.direction_tokens),
        }
        for p in ep.instr.pairs
    ]
    return {
        "session": session.id,
        "mode": session.mode,
        "node": st.node,
        "heading": st.heading,
        "edges": [
            {"to": e.to_id, "bearing": e.bearing, "length": e.length}
            for e in graph.edges_from(st.node)
        ],
        "instruction": {
            "text": ep.instr.raw_text,
            "pairs": pairs,
            "eta": st.attention.eta,
            "aimed_index": min(int(round(st.attention.eta)), ep.instr.num_pairs),
            "weights": [float(w) for w in weights],
        },
        "memory_png": base64.b64encode(png_bytes(st.memory)).decode("ascii"),
        "scale_m_per_px": st.memory.scale,
        "steps": st.steps,
        "max_steps": ep.cfg.max_steps,
        "traveled": st.traveled,
        "budget": ep.budget_m,
        "outcome": st.done,
        "final_distance_m": ep.distance_to_goal() if st.done != RUNNING else None,
    }


def _finish_if_terminal(store: SessionStore, session: Session) -> None:
    ep = session.episode
    if ep.state.done != RUNNING and session.finished_log is None:
        session.finished_log = TrajectoryLog(
            route_id=session.route_id, seed=session.seed, nodes=list(ep.visited),
            records=list(ep.records), outcome=ep.state.done,
            final_distance_to_goal=ep.distance_to_goal(),
            shortest_length=ep.route.total_length,
            traveled=ep.state.traveled, steps=ep.state.steps,
        )
        if store.log_dir is not None:
            store.log_dir.mkdir(parents=True, exist_ok=True)
            path = store.log_dir / f"{session.id}.jsonl"
            path.write_text(session.finished_log.to_jsonl(), encoding="utf-8")


def _apply_action(store: SessionStore, session: Session, bin_index: int) -> dict:
    """One human action: resolve pending landmark acknowledgments, perform
    the move, then acknowledge an arrival fire. At most one move per call."""
    if session.mode != "human":
        raise ApiError(409, f"session mode {session.mode!r} does not accept external actions")
    ep = session.episode
    if ep.state.done != RUNNING:
        raise ApiError(409, f"episode already finished: {ep.state.done}")

    policy: FixedBinPolicy = session.bundle.policy  # type: ignore[assignment]
    policy.bin_index = bin_index
    records = []
    moved = False
    for _ in range(_MAX_AUTO_FIRES):
        if moved and not ep.peek_decision(session.bundle):
            break
        record = ep.step(session.bundle)
        records.append(record)
        if ep.state.done != RUNNING:
            break
        if record.get("moved_to") is not None:
            moved = True
    _finish_if_terminal(store, session)
    return {"records": records, "observation": _observation_payload(session)}


class _Handler(BaseHTTPRequestHandler):
    store: SessionStore  # set by make_server
    protocol_version = "HTTP/1.1"
    disable_nagle_algorithm = True  # headers and body go out as separate
    # writes; Nagle + delayed ACK would stall each response ~40 ms

    def log_message(self, fmt, *args):  # silence default stderr chatter
        pass

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        try:
            return json.loads(self.rfile.read(length))
        except json.JSONDecodeError as e:
            raise ApiError(400, f"invalid JSON body: {e}") from e

    def _route(self, method: str):
        handlers = [
            (method == "POST", r"^/sessions/?$", self._create_session),
            (method == "GET", r"^/sessions/([^/]+)/observation$", self._observation),
            (method == "POST", r"^/sessions/([^/]+)/action$", self._action),
            (method == "GET", r"^/sessions/([^/]+)/log$", self._log),
            (method == "GET", r"^/datasets/?$", self._datasets),
            (method == "GET", r"^/datasets/([^/]+)/routes$", self._routes),
        ]
        for applies, pattern, fn in handlers:
            m = re.match(pattern, self.path)
            if applies and m:
                return fn(*m.groups())
        raise ApiError(404, f"no such endpoint: {self.command} {self.path}")

    def _dispatch(self, method: str) -> None:
        try:
            status, payload = self._route(method)
        except ApiError as e:
            status, payload = e.status, {"error": e.message}
        except Exception as e:  # noqa: BLE001 - surface anything unexpected as JSON
            status, payload = 500, {"error": f"{type(e).__name__}: {e}"}
        self._send(status, payload)

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_OPTIONS(self):
        self._send(204, {})

    # endpoint implementations -------------------------------------------

    def _create_session(self):
        body = self._body()
        for key in ("dataset", "route"):
            if key not in body:
                raise ApiError(400, f"missing field {key!r}")
        session = self.store.create(
            str(body["dataset"]), str(body["route"]),
            str(body.get("mode", "human")), body.get("seed"),
        )
        with session.lock:
            return 201, {"session": session.id, "observation": _observation_payload(session)}

    def _observation(self, session_id: str):
        session = self.store.get(session_id)
        with session.lock:
            if session.episode.state.done != RUNNING:
                # finished sessions still ship their final observation so
                # clients can render the outcome banner
                return 409, {
                    "error": f"episode finished: {session.episode.state.done}",
                    "observation": _observation_payload(session),
                }
            return 200, {"observation": _observation_payload(session)}

    def _action(self, session_id: str):
        session = self.store.get(session_id)
        body = self._body()
        if "bin" not in body:
            raise ApiError(400, "missing field 'bin'")
        try:
            bin_index = int(body["bin"])
        except (TypeError, ValueError):
            raise ApiError(400, f"bin must be an integer, got {body['bin']!r}") from None
        if not 0 <= bin_index < NUM_BINS:
            raise ApiError(400, f"bin must be in 0..{NUM_BINS - 1}, got {bin_index}")
        with session.lock:
            return 200, _apply_action(self.store, session, bin_index)

    def _log(self, session_id: str):
        session = self.store.get(session_id)
        with session.lock:
            if session.finished_log is not None:
                log = session.finished_log
            else:
                ep = session.episode
                log = TrajectoryLog(
                    route_id=session.route_id, seed=session.seed, nodes=list(ep.visited),
                    records=list(ep.records), outcome=ep.state.done,
                    final_distance_to_goal=ep.distance_to_goal(),
                    shortest_length=ep.route.total_length,
                    traveled=ep.state.traveled, steps=ep.state.steps,
                )
            return 200, {"records": log.records, **log.summary()}

    def _datasets(self):
        return 200, {"datasets": sorted(self.store.datasets)}

    def _routes(self, dataset_id: str):
        ds = self.store.datasets.get(dataset_id)
        if ds is None:
            raise ApiError(404, f"unknown dataset {dataset_id!r}")
        return 200, {
            "routes": [
                {"id": ep.episode_id, "difficulty": ep.difficulty,
                 "num_pairs": ep.instruction.num_pairs,
                 "length_m": ep.route.total_length}
                for ep in sorted(ds.episodes.values(), key=lambda e: e.episode_id)
            ]
        }


def discover_datasets(data_dir: str | Path) -> dict[str, Dataset]:
    """A data dir is either one dataset (manifest.json at top level) or a
    directory of dataset subdirectories."""
    root = Path(data_dir)
    if (root / "manifest.json").exists():
        return {root.name: load_dataset(root)}
    found = {}
    for sub in sorted(root.iterdir()):
        if sub.is_dir() and (sub / "manifest.json").exists():
            found[sub.name] = load_dataset(sub)
    if not found:
        raise FileNotFoundError(f"no datasets under {root}")
    return found


def make_server(store: SessionStore, port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"store": store})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(data_dir: str | Path, port: int = DEFAULT_PORT,
          log_dir: str | Path | None = None) -> None:
    store = SessionStore(discover_datasets(data_dir),
                         log_dir=Path(log_dir) if log_dir else Path(data_dir) / "logs")
    server = make_server(store, port)
    host, bound_port = server.server_address
    print(f"navsim service on http://{host}:{bound_port} "
          f"({len(store.datasets)} dataset(s))", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
