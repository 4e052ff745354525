import json

import pytest

from suprank.cli import main


@pytest.fixture
def files(tmp_path):
    (tmp_path / "ranking.txt").write_text("c0 c1 c2 c3\n", encoding="utf-8")
    (tmp_path / "truth.tsv").write_text("c0\t5\nc1\t0\nc2\t3\nc3\t0\n", encoding="utf-8")
    (tmp_path / "three.txt").write_text("a b c\nb a c\na c b\n", encoding="utf-8")
    (tmp_path / "edges.tsv").write_text("a\tb\nc\tb\nb\ta\n", encoding="utf-8")
    (tmp_path / "exp.yaml").write_text(
        "seed: 1\n"
        "data: {kind: synthetic, m: 60, faithful: 3, adversarial: 2}\n"
        "split: {train_fraction: 0.3, trials: 2}\n"
        "methods: [{method: borda}, {method: skr}]\n"
        "evaluation: {ap_k: 5}\n",
        encoding="utf-8",
    )
    return tmp_path


def test_evaluate(files, capsys):
    assert main(["evaluate", str(files / "ranking.txt"), str(files / "truth.tsv"), "-k", "4"]) == 0
    out = capsys.readouterr().out
    assert "auc=0.75" in out and "ap@4=0.833333" in out


def test_aggregate_borda(files, capsys):
    assert main(["aggregate", str(files / "three.txt"), "--method", "borda"]) == 0
    assert capsys.readouterr().out == "a b c\n"


def test_aggregate_skr_weights(files, capsys):
    assert main(["aggregate", str(files / "three.txt"), "--weights", "0,1,0", "--top-k", "3"]) == 0
    assert capsys.readouterr().out == "b a c\n"


def test_aggregate_bad_weights(files, capsys):
    assert main(["aggregate", str(files / "three.txt"), "--weights", "1,x"]) != 0
    assert "comma-separated" in capsys.readouterr().err


def test_malformed_rankings_report_line(files, capsys):
    bad = files / "bad.txt"
    bad.write_text("a b c\na a c\n", encoding="utf-8")
    assert main(["aggregate", str(bad)]) != 0
    assert "bad.txt:2" in capsys.readouterr().err


def test_malformed_truth_report_line(files, capsys):
    bad = files / "bad.tsv"
    bad.write_text("c0\t1\nc1\tmany\n", encoding="utf-8")
    assert main(["evaluate", str(files / "ranking.txt"), str(bad)]) != 0
    assert "bad.tsv:2" in capsys.readouterr().err


def test_malformed_edges_report_line(files, capsys):
    bad = files / "bad_edges.tsv"
    bad.write_text("a\tb\nlonely\n", encoding="utf-8")
    assert main(["centrality", str(bad)]) != 0
    assert ":2:" in capsys.readouterr().err


def test_centrality(files, capsys):
    assert main(["centrality", str(files / "edges.tsv"), "--metric", "indegree", "--metric", "pagerank"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "node\tindegree\tpagerank"
    assert lines[2].startswith("b\t2")
    assert main(["centrality", str(files / "edges.tsv"), "--metric", "indegree", "--ranking"]) == 0
    assert capsys.readouterr().out.split()[0] == "b"


def test_synth(capsys):
    assert main(["synth", "--m", "5", "--r", "3", "--swap-prob", "0"]) == 0
    assert capsys.readouterr().out == "c0 c1 c2 c3 c4\n" * 3
    assert main(["synth", "--swap-prob", "0.5"]) != 0


def test_experiment_deterministic(files):
    for name in ("a.json", "b.json"):
        assert main(["experiment", str(files / "exp.yaml"), "--json", str(files / name), "--no-timing"]) == 0
    a = (files / "a.json").read_bytes()
    assert a == (files / "b.json").read_bytes()
    assert set(json.loads(a)["methods"]) == {"borda", "skr"}


def test_experiment_seed_override_and_csv(files, capsys):
    out = files / "s.csv"
    assert main(["experiment", str(files / "exp.yaml"), "--seed", "9", "--csv", str(out), "--no-timing"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["config"]["seed"] == 9
    assert out.read_text().startswith("kind,name,auc_mean")


def test_experiment_bad_config(files, capsys):
    bad = files / "bad.yaml"
    bad.write_text("methods: []\ndata: {kind: synthetic}\n", encoding="utf-8")
    assert main(["experiment", str(bad)]) != 0
    assert "no methods" in capsys.readouterr().err
