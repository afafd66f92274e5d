import json
import subprocess
import sys
from pathlib import Path

import pytest

import lightspan.construction as construction
from lightspan.construction import ConstructionParams, run_construction
from lightspan.girth_graphs import gen_complete_bipartite
from lightspan.harness import experiments
from lightspan.harness.cli import main
from lightspan.harness.config import ExperimentConfig, load_config, parse_base, parse_seeds
from lightspan.errors import ConfigError
from lightspan.io import read_girth_graph, read_instance

GEN = ["generate", "--k", "2", "--base", "biclique:4", "--epsilon", "1/8", "--seeds", "1"]
STEM = "biclique-side4-k2-e8-s1"


def files(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


# -- config -----------------------------------------------------------------


def test_parse_seeds_and_base():
    assert parse_seeds("1,3-5, 9") == (1, 3, 4, 5, 9)
    assert parse_seeds("") == ()
    for bad in ("x", "5-3", "-2"):
        with pytest.raises(ConfigError):
            parse_seeds(bad)
    assert str(parse_base("pg2:3")) == "pg2:q=3"
    assert str(parse_base("random-alteration:40,2,seed=3")) == "random-alteration:n=40,kappa=2,seed=3"
    for bad in ("nope:1", "pg2:3,4", "pg2:side=3"):
        with pytest.raises(ConfigError):
            parse_base(bad)


def test_config_file_and_overrides(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("# sweep\ncommand = sweep\nk = 2\nbase = pg2:2 pg2:3\nseeds = 1-3\nconstant.kill_budget = 0.5\n")
    cfg = load_config(cfg_path, {"seeds": "4"})
    assert cfg.seeds == (4,) and len(cfg.bases) == 2
    assert cfg.constants["kill_budget"] == 0.5
    for text in ("bogus = 1\n", "constant.nope = 1\n", "k = x\n", "k = 1\n", "epsilon = 2/5\n",
                 "schema_version = 2\n", "format = xml\n", "no separator\n"):
        cfg_path.write_text(text)
        with pytest.raises(ConfigError):
            load_config(cfg_path)


def test_out_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("LIGHTSPAN_OUT", str(tmp_path / "envout"))
    assert ExperimentConfig().out_dir == tmp_path / "envout"
    assert ExperimentConfig(out="x").out_dir == Path("x")


# -- generate / verify ------------------------------------------------------


def test_generate_round_trip(tmp_path):
    out = tmp_path / "a"
    assert main(GEN + ["--out", str(out)]) == 0
    names = set(files(out))
    for suffix in ("base.edges", "base.json", "embedded.edges", "embedded.layout", "pruned.edges", "pruned.layout"):
        assert f"{STEM}.{suffix}" in names
    inst = run_construction(ConstructionParams(2, "1/8", gen_complete_bipartite(4), 1))
    assert read_instance(out / f"{STEM}.pruned.edges", out / f"{STEM}.pruned.layout") == inst
    assert read_instance(out / f"{STEM}.embedded.edges", out / f"{STEM}.embedded.layout") == inst.unpruned()
    assert read_girth_graph(out / f"{STEM}.base.edges", out / f"{STEM}.base.json") == gen_complete_bipartite(4)


def test_generate_is_byte_identical(tmp_path):
    assert main(GEN + ["--out", str(tmp_path / "a")]) == 0
    assert main(GEN + ["--out", str(tmp_path / "b")]) == 0
    assert files(tmp_path / "a") == files(tmp_path / "b")


def test_bad_config_key_writes_nothing(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("k = 2\nbase = biclique:4\nfrobnicate = 3\n")
    out = tmp_path / "out"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 2
    assert "frobnicate" in capsys.readouterr().err
    assert not out.exists()


def test_bad_base_writes_nothing(tmp_path):
    out = tmp_path / "out"
    assert main(["generate", "--base", "biclique:4", "--base", "pg2:4", "--out", str(out)]) == 2
    assert not out.exists()


def test_verify_pass_and_mutated_fail(tmp_path, capsys):
    out = tmp_path / "a"
    main(GEN + ["--out", str(out)])
    capsys.readouterr()
    pruned = out / f"{STEM}.pruned.edges"
    assert main(["verify", str(pruned)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] and report["value"] == "21/4" and report["threshold"] == "9/2"

    # put the pruned edges back: the light cycles they broke reappear
    layout = (out / f"{STEM}.pruned.layout").read_text()
    restored = [ln.split()[2:] for ln in layout.splitlines() if ln.startswith("pruned_edge")]
    assert restored
    lines = pruned.read_text().splitlines()
    n, m = map(int, lines[0].split())
    mutated = out / "mutated.edges"
    extra = [f"{a} {b} 8 1" for a, b in restored]
    mutated.write_text("\n".join([f"{n} {m + len(extra)}"] + lines[1:] + extra) + "\n")
    (out / "mutated.layout").write_text(layout)
    assert main(["verify", str(mutated)]) == 3
    report = json.loads(capsys.readouterr().out)
    assert not report["pass"]
    assert set(report["witness_edges"]) & set(range(m, m + len(extra)))


def test_verify_unit_cycle(tmp_path, capsys):
    p = tmp_path / "cycle.edges"
    p.write_text("50 50\n" + "".join(f"{i} {(i + 1) % 50} 1 1\n" for i in range(50)))
    assert main(["verify", str(p), "--k", "2", "--epsilon", "1/4"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == "50/1"
    assert main(["verify", str(p)]) == 2  # no layout and no epsilon


def test_certification_failure_exit(tmp_path, monkeypatch):
    monkeypatch.setattr(construction, "enumerate_cycles", lambda *a, **kw: iter(()))
    out = tmp_path / "c"
    assert main(["generate", "--base", "biclique:3", "--epsilon", "1/2", "--seeds", "2", "--out", str(out)]) == 3
    witness = json.loads((out / "biclique-side3-k2-e2-s2.witness.json").read_text())
    assert witness["witness_edges"]


def test_generation_failure_exit(tmp_path):
    base = "random-alteration:n=30,kappa=3,density_exponent=2.0"
    assert main(["generate", "--base", base, "--epsilon", "1/4", "--out", str(tmp_path)]) == 4


# -- sweep / compare / montecarlo --------------------------------------------


def test_sweep_zero_seeds(tmp_path):
    assert main(["sweep", "--base", "pg2:2", "--seeds", "", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert doc["rows"] == [] and doc["aggregate"]["rows"] == 0
    assert (tmp_path / "sweep.csv").read_text().count("\n") == 1


def test_sweep_rows_and_workers(tmp_path):
    args = ["sweep", "--base", "biclique:3", "--base", "pg2:2", "--epsilon", "1/2,1/4", "--seeds", "1-3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    a, b = files(tmp_path / "a"), files(tmp_path / "b")
    for name in ("sweep.csv", "sweep.json", "sweep.aggregate.csv"):
        assert a[name] == b[name]
    doc = json.loads(a["sweep.json"])
    rows = doc["rows"]
    assert len(rows) == 2 * 2 * 3
    assert [(r["grid_index"], r["seed"]) for r in rows] == sorted((r["grid_index"], r["seed"]) for r in rows)
    from fractions import Fraction
    for r in rows:
        assert r["status"] == "ok"
        assert Fraction(r["certificate"]) > Fraction(r["threshold"])
    assert list(rows[0]) == list(experiments.SWEEP_COLUMNS) == doc["columns"]


def test_sweep_collapse_flag(tmp_path):
    assert main(["sweep", "--base", "biclique:4", "--epsilon", "1/2", "--seeds", "1-4", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "sweep.json").read_text())["rows"]
    assert any(r["survival_flag"] == "collapsed" for r in rows)
    assert all((r["surviving_fraction"] < 0.5) == (r["survival_flag"] == "collapsed") for r in rows)


def test_sweep_failed_rows_continue(tmp_path):
    base = "random-alteration:n=30,kappa=3,density_exponent=2.0"
    assert main(["sweep", "--base", base, "--base", "pg2:2", "--k", "2", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "sweep.json").read_text())["rows"]
    assert rows[0]["status"] == "failed" and rows[0]["error_code"] == "generation"
    assert rows[1]["status"] == "ok"


def test_compare_keeps_everything(tmp_path):
    assert main(["compare", "--base", "pg2:2", "--base", "biclique:3", "--seeds", "1-2", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "compare.json").read_text())
    assert doc["aggregate"]["all_edges_kept"]
    assert all(r["kept_fraction"] == 1.0 for r in doc["rows"])
    assert [r["base_kept_fraction"] for r in doc["rows"] if r["base"] == "pg2:q=2"] == [1.0, 1.0]


def test_compare_invariant_violation(tmp_path, monkeypatch):
    real = experiments.greedy_spanner

    def lossy(g, t):
        res = real(g, t)
        if g.edge_count > 100:
            return real(g.with_edges(range(g.edge_count - 1)), t)
        return res

    monkeypatch.setattr(experiments, "greedy_spanner", lossy)
    assert main(["compare", "--base", "pg2:2", "--out", str(tmp_path)]) == 3
    row = json.loads((tmp_path / "compare.json").read_text())["rows"][0]
    assert row["error_code"] == "invariant"


def test_montecarlo_report(tmp_path):
    args = ["montecarlo", "--k", "2", "--epsilon", "1/4,1/8", "--trials", "20000", "--seeds", "1,2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--format", "json"]) == 0
    a = files(tmp_path / "a")
    assert a["montecarlo.json"] == files(tmp_path / "b")["montecarlo.json"]
    assert "montecarlo.csv" not in files(tmp_path / "b")
    doc = json.loads(a["montecarlo.json"])
    assert len(doc["rows"]) == 4
    for r in doc["rows"]:
        assert r["wilson_low"] <= r["estimate"] <= r["wilson_high"]


def test_montecarlo_rejects_few_trials(tmp_path):
    assert main(["montecarlo", "--epsilon", "1/4", "--trials", "999", "--out", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "lightspan", "sweep", "--base", "biclique:2", "--epsilon", "1/2", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "sweep.csv").exists()


def test_random_bases_are_regularized(tmp_path):
    base = experiments.make_base(parse_base("random-alteration:n=60,kappa=2"), seed=1)
    assert base.is_bipartite and "regularize" in base.provenance
    assert main(["sweep", "--k", "2", "--n-target", "2000", "--seeds", "1", "--out", str(tmp_path)]) == 0
    row = json.loads((tmp_path / "sweep.json").read_text())["rows"][0]
    assert row["status"] == "ok" and row["base"] == "random-alteration:kappa=1"
