import json
from pathlib import Path


from dexnet.cli import run

from fake_subgraph import FakeSubgraph, make_pairs

STATS_FILES = {"degree_distribution.csv", "fit.json", "betweenness_nodes.csv", "betweenness_edges.csv",
               "kcore.json", "gini.json", "components.json"}


def snapshot_dir(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_stats(fixture_dir, tmp_path):
    rc = run(["stats", "--dataset", str(fixture_dir), "--date", "2023-10-31", "--out", str(tmp_path)], environ={})
    assert rc == 0
    assert STATS_FILES <= {p.name for p in tmp_path.iterdir()}
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert fit["mode"] == "discrete" and fit["alpha"] > 1


def test_unknown_subcommand(capsys):
    assert run(["bogus"], environ={}) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag(fixture_dir):
    assert run(["stats", "--dataset", str(fixture_dir), "--frobnicate"], environ={}) == 2


def test_no_source_is_usage_error(capsys):
    assert run(["stats"], environ={}) == 2


def test_both_sources_is_usage_error(fixture_dir):
    assert run(["stats", "--dataset", str(fixture_dir), "--endpoint", "http://x"], environ={}) == 2


def test_flag_overrides_env_source(fixture_dir, tmp_path):
    env = {"DEXNET_SUBGRAPH_URL": "http://127.0.0.1:9/"}
    assert run(["build", "--dataset", str(fixture_dir), "--out", str(tmp_path)], environ=env) == 0


def test_runtime_error_exit_1(tmp_path, capsys):
    assert run(["stats", "--dataset", str(tmp_path / "missing")], environ={}) == 1
    assert "not found" in capsys.readouterr().err


def test_attack_four_traces_deterministic(fixture_dir, tmp_path):
    args = ["attack", "--dataset", str(fixture_dir), "--strategies", "tvl,degree,betweenness,random",
            "--n", "50", "--seed", "7"]
    assert run(args + ["--out", str(tmp_path / "a")], environ={}) == 0
    assert run(args + ["--out", str(tmp_path / "b")], environ={}) == 0
    a, b = snapshot_dir(tmp_path / "a"), snapshot_dir(tmp_path / "b")
    assert a == b
    assert {f"trace_{s}.csv" for s in ("tvl", "degree", "betweenness", "random")} <= set(a)
    assert len(a["trace_tvl.csv"].splitlines()) == 51


def test_attack_default_n_is_capped(fixture_dir, tmp_path):
    assert run(["attack", "--dataset", str(fixture_dir), "--strategies", "degree", "--out", str(tmp_path)],
               environ={}) == 0
    rows = (tmp_path / "trace_degree.csv").read_text().splitlines()
    assert len(rows) - 1 == 360 - 4


def test_seed_changes_random_only(fixture_dir, tmp_path):
    for seed in ("1", "2"):
        run(["attack", "--dataset", str(fixture_dir), "--strategies", "degree,random", "--n", "20",
             "--seed", seed, "--out", str(tmp_path / seed)], environ={})
    one, two = snapshot_dir(tmp_path / "1"), snapshot_dir(tmp_path / "2")
    assert one["trace_degree.csv"] == two["trace_degree.csv"]
    assert one["trace_random.csv"] != two["trace_random.csv"]


def test_config_file_and_precedence(fixture_dir, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'[run]\ndataset = "{fixture_dir}"\nseed = 3\n\n[attack]\nstrategies = ["random"]\nn = 5\n')
    assert run(["attack", "--config", str(cfg), "--n", "7", "--out", str(tmp_path / "o")], environ={}) == 0
    rows = (tmp_path / "o" / "trace_random.csv").read_text().splitlines()
    assert len(rows) == 8


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('colour = "blue"\n')
    assert run(["stats", "--config", str(cfg)], environ={}) == 2


def test_evolve(fixture_dir, tmp_path):
    rc = run(["evolve", "--dataset", str(fixture_dir), "--start", "2023-09-01", "--end", "2023-09-10",
              "--out", str(tmp_path)], environ={})
    assert rc == 0
    assert len((tmp_path / "evolution.csv").read_text().splitlines()) == 11


def test_ingest_from_endpoint(tmp_path):
    with FakeSubgraph(make_pairs(30)) as fake:
        rc = run(["ingest", "--endpoint", fake.url, "--start", "2023-01-01", "--end", "2023-01-02",
                  "--out", str(tmp_path)], environ={})
    assert rc == 0
    assert len((tmp_path / "pairs.jsonl").read_text().splitlines()) == 30


def test_ingest_endpoint_from_env(tmp_path):
    with FakeSubgraph(make_pairs(3)) as fake:
        rc = run(["ingest", "--start", "2023-01-01", "--end", "2023-01-01", "--out", str(tmp_path)],
                 environ={"DEXNET_SUBGRAPH_URL": fake.url})
    assert rc == 0


def test_report_pipeline(fixture_dir, tmp_path):
    assert run(["report", "--dataset", str(fixture_dir), "--n", "20", "--out", str(tmp_path)], environ={}) == 0
    files = snapshot_dir(tmp_path)
    assert "stats/fit.json" in files and "attack/traces.csv" in files and "evolution/evolution.csv" in files
    summary = json.loads(files["graph/graph.json"])
    assert summary["rejected_samples"] == {"cap-exceeded": 3, "price-deviation": 2}
