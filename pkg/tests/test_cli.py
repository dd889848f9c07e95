import json

import pytest

from satcause.cli import EXIT_DATA, EXIT_LEARN, EXIT_OK, EXIT_QUERY, EXIT_REFUTED, RunConfig, build_config, build_parser, main


@pytest.fixture(scope="module")
def sim(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--n", "3000", "--seed", "4", "--out", str(out)]) == EXIT_OK
    g = tmp_path_factory.mktemp("learned")
    assert main(["learn", "--data", str(out / "data.csv"), "--k", "4", "--seed", "7", "--out", str(g)]) == EXIT_OK
    return out, g


def read(path):
    return json.loads(path.read_text())


def test_simulate_outputs(sim):
    out, _ = sim
    assert {p.name for p in out.iterdir()} == {"data.csv", "scm.json", "schema.json"}
    doc = read(out / "scm.json")
    assert doc["format_version"] == 1 and doc["config"]["seed"] == 4
    assert doc["n"] == 3000


def test_learn_outputs(sim):
    _, g = sim
    assert {p.name for p in g.iterdir()} == {"graph.json", "graph.dot", "tally.json"}
    doc = read(g / "graph.json")
    assert doc["config"]["k"] == 4 and doc["config"]["seed"] == 7
    assert all(e[0] != "Utility" for e in doc["edges"])
    tally = read(g / "tally.json")
    assert tally["k"] == 4 and len(tally["fold_graphs"]) == 4
    dot = (g / "graph.dot").read_text()
    assert dot.startswith("// format_version 1") and "digraph" in dot


def test_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert main(["learn", "--data", str(missing), "--out", str(tmp_path)]) == EXIT_DATA
    assert str(missing) in capsys.readouterr().err


def test_cyclic_whitelist(sim, tmp_path, capsys):
    out, _ = sim
    wl = tmp_path / "c.json"
    wl.write_text(json.dumps({"whitelist": [["LBD", "UIP"], ["UIP", "LBD"]]}))
    rc = main(["learn", "--data", str(out / "data.csv"), "--constraints", str(wl), "--out", str(tmp_path)])
    assert rc == EXIT_LEARN
    assert "cyclic whitelist" in capsys.readouterr().err


def test_query_preset_and_expr_agree(sim, tmp_path):
    out, g = sim
    common = ["--data", str(out / "data.csv"), "--graph", str(g / "graph.json"), "--refute-runs", "20"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["query", "--preset", "Q1", "--out", str(a), *common]) in (EXIT_OK, EXIT_REFUTED)
    assert main(["query", "--expr", "ATE(LBD, Utility, 2, 1)", "--out", str(b), *common]) in (EXIT_OK, EXIT_REFUTED)
    va = read(a / "answers.json")["answers"][0]["estimates"][0]["value"]
    vb = read(b / "answers.json")["answers"][0]["estimates"][0]["value"]
    assert va == vb < 0


def test_query_exit_codes(sim, tmp_path):
    out, g = sim
    common = ["--data", str(out / "data.csv"), "--graph", str(g / "graph.json"), "--out", str(tmp_path)]
    assert main(["query", "--expr", "ATE(Glue, Utility, 2, 1)", *common]) == EXIT_QUERY
    assert main(["query", "--expr", "ATE(LBD, Utility, 2)", *common]) == EXIT_QUERY
    assert main(["query", *common]) == EXIT_QUERY


def test_refute_and_fitness(sim, tmp_path):
    out, g = sim
    common = ["--data", str(out / "data.csv"), "--graph", str(g / "graph.json"), "--out", str(tmp_path)]
    rc = main(["refute", "--preset", "Q6", "--refute-runs", "20", *common])
    doc = read(tmp_path / "refutation.json")
    assert rc == (EXIT_OK if doc["status"] == "Success" else EXIT_REFUTED)
    assert len(doc["estimates"][0]["refutations"]) == 3
    assert main(["fitness", "--k", "3", *common]) == EXIT_OK
    fit = read(tmp_path / "fitness.json")
    assert fit["k"] == 3 and "Branching=Maple" in fit["correlations"]


def test_export_dot(sim, tmp_path, capsys):
    _, g = sim
    assert main(["export-dot", "--graph", str(g / "graph.json")]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("digraph")
    assert main(["export-dot", "--graph", str(g / "graph.json"), "-o", str(tmp_path / "g.dot")]) == EXIT_OK
    assert (tmp_path / "g.dot").read_text() == text


def test_inputs_not_mutated(sim, tmp_path):
    out, g = sim
    before = {p: p.read_bytes() for p in [out / "data.csv", g / "graph.json"]}
    main(["fitness", "--data", str(out / "data.csv"), "--graph", str(g / "graph.json"), "--k", "3", "--out", str(tmp_path)])
    assert all(p.read_bytes() == b for p, b in before.items())


def test_config_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("SATCAUSE_OUT", "from-env")
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# settings\nk = 5\nseed = 3\nrefute_runs = 40\n")
    args = build_parser().parse_args(["learn", "--config", str(cfg_file), "--seed", "9"])
    cfg = build_config(args)
    assert (cfg.k, cfg.seed, cfg.refute_runs, cfg.out) == (5, 9, 40, "from-env")
    assert RunConfig().k == 10 and RunConfig().refute_runs == 100


def test_bad_config_value(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("k = many\n")
    assert main(["learn", "--config", str(cfg_file)]) == EXIT_DATA


def test_simulate_too_small(tmp_path):
    assert main(["simulate", "--n", "500", "--out", str(tmp_path)]) == EXIT_DATA


def test_pipeline_small_data(sim, tmp_path):
    out, _ = sim
    lines = (out / "data.csv").read_text().splitlines()
    small = tmp_path / "small.csv"
    small.write_text("\n".join(lines[:501]) + "\n")
    rc = main(["pipeline", "--data", str(small), "--refute-runs", "20", "--k", "5", "--out", str(tmp_path / "p")])
    report = read(tmp_path / "p" / "report.json")
    assert rc == (EXIT_OK if report["status"] == "Success" else EXIT_REFUTED)
    assert len(report["presets"]) == 7
    assert report["data"]["n"] == 500
    assert report["warnings"]
    assert any("wide refutation variance" in w for w in report["warnings"])
