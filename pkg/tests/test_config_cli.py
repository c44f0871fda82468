import json
import math
import subprocess
import sys

import pytest

from platoonrisk import ConfigError, load_scenario, parse_scenario
from platoonrisk.cli import main as cli_main


def write_config(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


BASE = {
    "graph": {"kind": "complete", "n": 11},
    "sim": {"dt": 0.001, "t_sample": 20.0, "n_traj": 2, "seed": 9},
}


def test_defaults_mirror_reference_parameters(tmp_path):
    cfg = load_scenario(write_config(tmp_path, {}))
    p = cfg.params
    assert (p.n, p.d, p.c, p.tau, p.g, p.epsilon) == (11, 1.01, 1.21, 0.01, 1.0, 0.1)
    assert math.isclose(p.beta, 1.0 / 3.0)
    assert cfg.graph.n == 11 and len(cfg.graph.edges) == 55


def test_schema_violations_reported_with_path(tmp_path):
    with pytest.raises(ConfigError, match="params/c"):
        load_scenario(write_config(tmp_path, {"params": {"c": 0.5}}))
    with pytest.raises(ConfigError, match="graph"):
        load_scenario(write_config(tmp_path, {"graph": {"kind": "torus", "n": 4}}))
    with pytest.raises(ConfigError):
        parse_scenario({"unknown_block": 1})


def test_json_syntax_error_reports_line_and_column(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "graph": {,}\n}')
    with pytest.raises(ConfigError, match="line 2"):
        load_scenario(str(path))


def test_explicit_graph_requires_edges():
    with pytest.raises(ConfigError, match="edge"):
        parse_scenario({"graph": {"kind": "explicit", "n": 3}})


def test_cli_analyze_csv(tmp_path, capsys):
    rc = cli_main(["analyze", "--config", write_config(tmp_path, BASE)])
    out = capsys.readouterr().out
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[0] == "# schema_version=1"
    assert lines[1].split(",")[0] == "pair_index"
    assert len(lines) == 12  # header comment + header + 10 pairs
    first = lines[2].split(",")
    assert first[-1] == "finite"


def test_cli_analyze_json_and_dumps(tmp_path):
    out = tmp_path / "report.json"
    spec_dump = tmp_path / "spectrum.json"
    var_dump = tmp_path / "variances.csv"
    rc = cli_main(["analyze", "--config", write_config(tmp_path, BASE),
                   "--format", "json", "--output", str(out),
                   "--dump-spectrum", str(spec_dump),
                   "--dump-variances", str(var_dump)])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert len(doc["pairs"]) == 10
    assert doc["spectrum"]["lambda2"] == 11.0
    sp = json.loads(spec_dump.read_text())
    assert len(sp["eigenvalues"]) == 11
    assert var_dump.read_text().startswith("# schema_version=1")


def test_cli_exit_code_config_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{nope")
    rc = cli_main(["analyze", "--config", str(path)])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_cli_exit_code_unstable(tmp_path, capsys):
    doc = dict(BASE, params={"tau": 0.2})
    rc = cli_main(["analyze", "--config", write_config(tmp_path, doc)])
    assert rc == 3
    err = capsys.readouterr().err
    assert "unstable" in err


def test_cli_tau_override_triggers_instability(tmp_path):
    rc = cli_main(["analyze", "--config", write_config(tmp_path, BASE),
                   "--tau", "0.2"])
    assert rc == 3


def test_cli_path_graph_reports_all_infinite(tmp_path, capsys):
    doc = {"graph": {"kind": "path", "n": 11}}
    rc = cli_main(["analyze", "--config", write_config(tmp_path, doc)])
    out = capsys.readouterr().out
    assert rc == 0
    rows = [ln.split(",") for ln in out.strip().splitlines()[2:]]
    assert all(row[5] == "inf" and row[6] == "infinite" for row in rows)


def test_cli_stability_table(tmp_path, capsys):
    rc = cli_main(["stability", "--config", write_config(tmp_path, BASE)])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.splitlines()[1] == "lambda,s1,s2,a,s2_cap,pass"
    assert len(out.strip().splitlines()) == 12


def test_cli_bounds_json(tmp_path, capsys):
    rc = cli_main(["bounds", "--config", write_config(tmp_path, BASE)])
    doc = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert doc["precondition_ok"] is True
    assert doc["e_min"] == doc["e_max"]


def test_cli_sweep_epsilon_sorted_and_deduplicated(tmp_path, capsys):
    doc = dict(BASE, epsilon_sweep=[0.1, 0.3, 0.05, 0.1])
    rc = cli_main(["sweep-epsilon", "--config", write_config(tmp_path, doc)])
    captured = capsys.readouterr()
    assert rc == 0
    assert "duplicate epsilon" in captured.err
    eps_col = [float(ln.split(",")[0]) for ln in captured.out.strip().splitlines()[2:]]
    assert eps_col == sorted(eps_col, reverse=True)
    assert len(set(eps_col)) == 3


def test_cli_sweep_requires_sweep_block(tmp_path):
    rc = cli_main(["sweep-epsilon", "--config", write_config(tmp_path, BASE)])
    assert rc == 2


def test_cli_simulate_summary(tmp_path, capsys):
    rc = cli_main(["simulate", "--config", write_config(tmp_path, BASE),
                   "--traj", "2", "--horizon", "10", "--burn", "5"])
    doc = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert len(doc["empirical_var"]) == 10
    assert doc["n_samples"] > 0


def test_cli_simulate_divergence_exit_code(tmp_path, capsys):
    doc = {"graph": {"kind": "complete", "n": 11},
           "params": {"tau": 0.2},
           "sim": {"dt": 0.02, "t_sample": 400.0, "n_traj": 1, "seed": 1,
                   "t_burn": 0.0}}
    rc = cli_main(["simulate", "--config", write_config(tmp_path, doc)])
    assert rc == 4
    assert "numerical failure" in capsys.readouterr().err


def test_cli_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path, dict(BASE, output={"format": "csv"}))
    outputs = []
    for name in ("a.json", "b.json", "c.json"):
        out = tmp_path / name
        args = ["simulate", "--config", cfg, "--traj", "4", "--horizon", "10",
                "--burn", "2", "--output", str(out)]
        if name == "c.json":
            args += ["--threads", "2"]
        assert cli_main(args) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_cli_validate_report(tmp_path, capsys):
    doc = dict(BASE, sim={"dt": 0.001, "t_sample": 60.0, "n_traj": 4,
                          "seed": 2, "t_burn": 10.0})
    rc = cli_main(["validate", "--config", write_config(tmp_path, doc),
                   "--rtol", "0.25"])
    report = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert report["stable"] is True
    names = {c["check"] for c in report["checks"]}
    assert "risk_ordering_var_cvar_evar" in names
    assert any(n.startswith("variance_pair_") for n in names)


def test_cli_entry_point_installed():
    proc = subprocess.run([sys.executable, "-m", "platoonrisk.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "analyze" in proc.stdout


def test_output_dir_env_redirect(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PLATOONRISK_OUTPUT_DIR", str(tmp_path / "outs"))
    rc = cli_main(["bounds", "--config", write_config(tmp_path, BASE),
                   "--output", "bounds.json"])
    assert rc == 0
    assert (tmp_path / "outs" / "bounds.json").exists()
