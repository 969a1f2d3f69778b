import json

import pytest

from navsim.cli import main
from navsim.citygraph import load_graph
from navsim.routegen import load_route


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "town"
    code = main(["dataset", "--out", str(out), "--grid", "8", "--seed", "3",
                 "--episodes", "6"])
    assert code == 0
    return out


def test_dataset_layout(dataset_dir):
    assert (dataset_dir / "manifest.json").exists()
    assert (dataset_dir / "graph.json").exists()
    assert (dataset_dir / "features.bin").exists()
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    assert len(manifest["episodes"]) == 6
    graph = load_graph(dataset_dir / "graph.json")
    assert len(graph) == 64


def test_routegen_writes_route_files(dataset_dir, tmp_path):
    out = tmp_path / "routes"
    code = main(["routegen", "--graph", str(dataset_dir / "graph.json"),
                 "--k", "5", "--seed", "1", "--count", "3", "--out", str(out)])
    assert code == 0
    files = sorted(out.glob("route_*.json"))
    assert len(files) == 3
    graph = load_graph(dataset_dir / "graph.json")
    for f in files:
        route = load_route(graph, f)
        assert route.total_length > 0


def test_landmarks_updates_route_file(dataset_dir, tmp_path):
    out = tmp_path / "routes"
    main(["routegen", "--graph", str(dataset_dir / "graph.json"),
          "--k", "4", "--seed", "7", "--count", "8", "--out", str(out)])
    graph = load_graph(dataset_dir / "graph.json")
    target = next(f for f in sorted(out.glob("route_*.json"))
                  if len(load_route(graph, f).node_ids) >= 6)
    code = main(["landmarks", "--route", str(target),
                 "--graph", str(dataset_dir / "graph.json"), "--l", "3", "--exact"])
    assert code == 0
    raw = json.loads(target.read_text())
    assert len(raw["landmarks"]) == 5  # source + 3 + destination
    route = load_route(graph, target)
    assert len(route.landmark_ids) == 5


def test_run_and_eval(dataset_dir, tmp_path):
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    logs = tmp_path / "logs"
    logs.mkdir()
    for entry in manifest["episodes"][:3]:
        code = main(["run", "--data", str(dataset_dir), "--route", entry["id"],
                     "--mode", "oracle", "--out", str(logs / f"{entry['id']}.jsonl")])
        assert code == 0
    report_path = tmp_path / "report.json"
    code = main(["eval", "--logs", str(logs), "--out", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["n"] == 3
    assert report["spl"] == 100.0


def test_run_unknown_route_fails(dataset_dir, tmp_path):
    code = main(["run", "--data", str(dataset_dir), "--route", "missing",
                 "--out", str(tmp_path / "x.jsonl")])
    assert code == 1


def test_eval_empty_dir_fails(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["eval", "--logs", str(empty), "--out", str(tmp_path / "r.json")]) == 1
