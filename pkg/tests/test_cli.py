import json

import pytest

from signrel.cli import main
from signrel.datasets import karate_paths
from signrel.graph import read_edge_list


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def sim(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 24, "m": 800, "seed": 1}))
    assert run("simulate", "--config", cfg, "--out-dir", tmp_path / "sim") == 0
    return tmp_path / "sim"


def test_full_pipeline(tmp_path, sim):
    g, lab, att = sim / "interactions.csv", sim / "labels.csv", sim / "attributes.csv"
    assert run("ingest", "--graph", g, "--out", tmp_path / "g.csv") == 0
    assert run("marginals", "--graph", g, "--out", tmp_path / "m.csv") == 0
    assert run("fit", "--graph", g, "--labels", lab, "--out", tmp_path / "fit.json") == 0
    fitted = json.loads((tmp_path / "fit.json").read_text())
    assert set(fitted["coef"]) == {"a", "b"}
    assert run("infer", "--graph", g, "--coeffs", tmp_path / "fit.json", "--out", tmp_path / "s.csv") == 0
    assert (tmp_path / "s.csv.json").exists()
    assert (tmp_path / "s.csv.manifest.json").exists()
    assert run("evaluate", "--graph", g, "--labels", lab, "--folds", 3, "--format", "json",
               "--out", tmp_path / "e.json") == 0
    assert run("compare", "--graph", g, "--labels", lab, "--folds", 3, "--out", tmp_path / "c.txt") == 0
    assert "Balanced Accuracy" in (tmp_path / "c.txt").read_text()
    assert run("homophily", "--signed", tmp_path / "s.csv", "--attributes", att, "--attribute", "group",
               "--out", tmp_path / "h.txt") == 0
    assert run("triads", "--signed", tmp_path / "s.csv", "--attributes", att, "--group-attr", "group",
               "--format", "json", "--out", tmp_path / "t.json") == 0
    triads = json.loads((tmp_path / "t.json").read_text())
    assert len(triads) == 2


def test_marginals_csv_header(tmp_path):
    assert run("marginals", "--graph", karate_paths()["edges"], "--out", tmp_path / "m.csv") == 0
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "source,target,A,Xi,p_under,p_eq,p_over"
    assert len(lines) == 1 + 34 * 33


def test_exit_codes(tmp_path, capsys):
    assert run("infer", "--graph", tmp_path / "missing.csv", "--default-coeffs", "--out", tmp_path / "x") == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("source,target,weight\na,b,x\n")
    assert run("ingest", "--graph", bad, "--out", tmp_path / "y") == 2
    assert run("ingest", "--graph", karate_paths()["edges"], "--t0", 5, "--t1", 1, "--out", tmp_path / "z") == 2
    with pytest.raises(SystemExit) as exc:
        run("no-such-command")
    assert exc.value.code == 1
    lab = tmp_path / "lab.csv"
    lab.write_text("source,target,relation\n1,2,1\n")
    # a single labelled pair among two surveyed nodes leaves no negatives
    assert run("fit", "--graph", karate_paths()["edges"], "--labels", lab, "--out", tmp_path / "f.json") == 3
    coeffs = tmp_path / "c.json"
    coeffs.write_text(json.dumps({"predictor": "phi", "response": "logistic", "coef": {"a": "inf", "b": 0},
                                  "intercept": 0}))
    assert run("infer", "--graph", karate_paths()["edges"], "--coeffs", coeffs, "--out", tmp_path / "s") == 4


def test_round_trip_ingest(tmp_path):
    out = tmp_path / "g.csv"
    assert run("ingest", "--graph", karate_paths()["edges"], "--out", out) == 0
    assert read_edge_list(out).edges_by_id() == read_edge_list(karate_paths()["edges"]).edges_by_id()
