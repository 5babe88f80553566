import json

import numpy as np
import pytest

from specrad import cli
from specrad import experiments as ex
from specrad.errors import ConfigurationError


def cfg(tmp_path, experiment, **kw):
    return ex.ExperimentConfig(experiment=experiment, output_dir=str(tmp_path), **kw)


def test_config_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        ex.ExperimentConfig.from_dict({"experiment": "convergence", "trails": 3})
    with pytest.raises(ConfigurationError):
        ex.ExperimentConfig("convergence", trials=0)
    with pytest.raises(ConfigurationError):
        ex.ExperimentConfig("convergence", n_values=[])
    with pytest.raises(ConfigurationError):
        ex.ExperimentConfig("convergence", delta=0.0)
    with pytest.raises(ConfigurationError):
        ex.ExperimentConfig("fig1")
    with pytest.raises(ConfigurationError):
        ex.ExperimentConfig("convergence", dist={"kind": "pareto"})
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"experiment": "toy_phase", "n_values": [50], "trials": 4}))
    c = ex.ExperimentConfig.from_json(p)
    assert c.trials == 4 and c.entry_dist().kind == "sparse_toy"
    p.write_text("{not json")
    with pytest.raises(ConfigurationError):
        ex.ExperimentConfig.from_json(p)


def test_trial_seeds():
    assert ex.trial_seed(1, 2) == ex.trial_seed(1, 2)
    seeds = {ex.trial_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000 and all(0 <= s < 2**64 for s in seeds)
    assert ex.trial_seed(7, 1, 2) != ex.trial_seed(7, 2, 1)


def test_csv_writer(tmp_path):
    p = ex.write_csv(tmp_path / "a.csv", [{"x": 0.1, "ok": True, "n": None}], ["x", "ok", "n"])
    assert p.read_text() == "# specrad-csv v1\nx,ok,n\n0.1,1,\n"


def test_wilson_interval():
    lo, hi = ex.wilson_interval(8, 10)
    assert lo == pytest.approx(0.4902, abs=1e-4) and hi == pytest.approx(0.9433, abs=1e-4)
    assert ex.wilson_interval(0, 0) == (0.0, 1.0)


def test_has_directed_cycle():
    assert not ex.has_directed_cycle(np.triu(np.ones((4, 4)), 1))
    assert ex.has_directed_cycle(np.eye(3))
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 2] = a[2, 0] = 1
    assert ex.has_directed_cycle(a)
    assert not ex.has_directed_cycle(np.zeros((3, 3)))


def test_acyclic_union_bound():
    assert ex.acyclic_union_bound(0.001, 100) == pytest.approx(0.1 / 0.9)
    assert ex.acyclic_union_bound(0.01, 100) == 1.0


def _csv_bytes(res):
    return {p.name: p.read_bytes() for p in res.files if p.suffix in (".csv", ".svg")}


def test_convergence_runner_and_determinism(tmp_path):
    c = cfg(tmp_path / "a", "convergence", n_values=[20, 40], trials=3, delta=0.5)
    r1 = ex.run(c)
    r2 = ex.run(cfg(tmp_path / "b", "convergence", n_values=[20, 40], trials=3, delta=0.5))
    assert _csv_bytes(r1) == _csv_bytes(r2)
    assert r1.ok and len(r1.records) == 6
    row = r1.summary[-1]
    assert row["markov_tail_bound"] > 0 and 0 <= row["tail_frequency"] <= 1
    m = json.loads((tmp_path / "a" / "convergence_manifest.json").read_text())
    assert m["seed"] == 0 and m["spec_version"] and "wall_time_s" in m and m["decisions"]
    first = (tmp_path / "a" / "convergence_trials.csv").read_text().splitlines()
    assert first[0] == "# specrad-csv v1" and first[1].startswith("n,trial,seed")


def test_convergence_zero_matrix(tmp_path):
    r = ex.run(cfg(tmp_path, "convergence", n_values=[10], trials=2, dist={"kind": "zero"}))
    assert all(x["rho_over_sqrt_n"] == 0 for x in r.records)
    assert r.summary[0]["markov_tail_bound"] == 0.0


def test_monotone_helper():
    assert ex.monotone_within_stddev([1.2, 1.1, 1.05], [0.01, 0.01, 0.01])
    assert ex.monotone_within_stddev([1.2, 1.1, 1.105], [0.01, 0.01, 0.01])
    assert not ex.monotone_within_stddev([1.2, 1.0, 1.15], [0.01, 0.01, 0.01])


def test_toy_phase_runner(tmp_path):
    r = ex.run(cfg(tmp_path, "toy_phase", n_values=[40], trials=30, q_values=[1.0, 0.002]))
    dense, sparse = r.summary
    assert dense["p_rho_positive"] == 1.0
    assert sparse["bound_id"] == "acyclic_union_2qN" and sparse["acyclic_violations"] == 0
    assert all(rec["has_cycle"] or not rec["rho_positive"] for rec in r.records)
    assert r.ok


def test_lemma_suite_runner(tmp_path):
    r = ex.run(cfg(tmp_path, "lemma_suite", max_k=3, max_N=4))
    assert r.ok
    lines = (tmp_path / "lemma_traceability.csv").read_text().splitlines()
    assert lines[1] == "lemma,check,result,ok" and len(lines) > 8


def test_ak_frequency_runner(tmp_path):
    r = ex.run(cfg(tmp_path, "ak_frequency", n_values=[12], k_values=[3], trials=5, dist={"kind": "zero"}))
    assert r.summary[0]["frequency"] == 1.0
    r = ex.run(cfg(tmp_path, "ak_frequency", n_values=[12], k_values=[3], trials=5, dist={"kind": "rademacher"}))
    assert r.summary[0]["frequency"] == 1.0 and r.summary[0]["hypotheses_met"]
    per_m = (tmp_path / "ak_frequency_per_m.csv").read_text().splitlines()
    assert per_m[1] == "n,k,seed,m,sum_plain,sum_rooted,sum_moment" and len(per_m) == 2 + 15
    with pytest.raises(ConfigurationError):
        ex.run(cfg(tmp_path, "ak_frequency", n_values=[12, 14, 16], k_values=[3, 4]))


def test_figure1_runner(tmp_path):
    r = ex.run(cfg(tmp_path, "figure1", n_values=[60], trials=2))
    assert [s["m2_source"] for s in r.summary] == ["empirical", "analytic"]
    assert any("empirical" in d for d in r.manifest["decisions"])
    svg = (tmp_path / "figure1_alpha1.8.svg").read_text()
    assert svg.startswith("<svg") and 'stroke="red"' in svg and svg.count("<circle") == 60
    assert "time" not in svg.lower() and "date" not in svg.lower()
    ev = (tmp_path / "figure1_alpha2.2_eigenvalues.csv").read_text().splitlines()
    assert ev[1] == "re,im" and len(ev) == 62


def test_parallel_pool_matches_serial(tmp_path):
    a = ex.run(cfg(tmp_path / "s", "toy_phase", n_values=[30], trials=6, q_values=[0.01]))
    b = ex.run(cfg(tmp_path / "p", "toy_phase", n_values=[30], trials=6, q_values=[0.01], workers=2))
    assert _csv_bytes(a) == _csv_bytes(b)


# command line ----------------------------------------------------------------


def test_cli_success_and_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    code = cli.main(["toy-phase", "--n", "30", "--q", "0.01,1", "--trials", "5", "--out", str(out)])
    assert code == 0
    assert (out / "toy_phase_summary.csv").exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_config_file_and_override(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"n_values": [15], "trials": 2, "output_dir": str(tmp_path / "x")}))
    assert cli.main(["convergence", "--config", str(conf), "--trials", "3", "--k", "3"]) == 0
    m = json.loads((tmp_path / "x" / "convergence_manifest.json").read_text())
    assert m["config"]["trials"] == 3 and m["config"]["k_override"] == 3


def test_cli_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["convergence", "--bogus"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        cli.main(["nonsense"])
    assert err.value.code == 1
    conf = tmp_path / "bad.json"
    conf.write_text(json.dumps({"trialz": 3}))
    assert cli.main(["convergence", "--config", str(conf)]) == 1
    conf.write_text(json.dumps({"experiment": "figure1"}))
    assert cli.main(["convergence", "--config", str(conf)]) == 1
    assert cli.main(["convergence", "--trials", "0", "--out", str(tmp_path)]) == 1
    assert cli.main(["spectrum", "--dist", "cauchy", "--out", str(tmp_path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_verification_failure_exit_code(tmp_path, monkeypatch):
    def failing(c):
        return ex.ExperimentResult(c, [], [{"ok": False}], {}, [])

    monkeypatch.setattr(cli, "run", failing)
    assert cli.main(["lemmas", "--out", str(tmp_path)]) == 2


def test_cli_enumerate_and_spectrum(tmp_path):
    assert cli.main(["enumerate", "--n", "3", "--k", "1,2", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "census.csv").read_text().splitlines()
    assert lines[1] == "k,l,N,labeled_count,class_count,bound,bound_ok" and len(lines) == 2 + 3
    assert cli.main(["spectrum", "--n", "12", "--alpha", "2.5", "--seed", "4", "--out", str(tmp_path)]) == 0
    b = json.loads((tmp_path / "bounds.json").read_text())
    assert all(x["value"] >= b["rho"] * (1 - 1e-9) for x in b["bounds"])
    assert len((tmp_path / "spectrum.csv").read_text().splitlines()) == 13
    conf = tmp_path / "s.json"
    conf.write_text(json.dumps({"dist": {"kind": "rademacher"}, "n_values": [9], "output_dir": str(tmp_path / "z")}))
    assert cli.main(["spectrum", "--config", str(conf)]) == 0
    assert (tmp_path / "z" / "spectrum.csv").exists()
