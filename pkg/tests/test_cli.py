import json
import subprocess
import sys

import numpy as np
import pytest

from elastic_np import cli
from elastic_np.errors import ConfigError

SMALL = ["--resolutions", "8,10,12"]


def run(tmp_path, *args, name="out"):
    return cli.main([*args, "--out", str(tmp_path / name)])


def test_verify_kernels_default(tmp_path, capsys):
    assert run(tmp_path, "verify-kernels") == cli.EXIT_OK
    out = tmp_path / "out"
    rep = json.loads((out / "report.json").read_text())
    assert all(c["passed"] for c in rep["checks"])
    names = {c["name"] for c in rep["checks"]}
    assert {"k2_weak_singularity_growth_sphere", "k2_weak_singularity_growth_ellipsoid"} <= names
    assert rep["provenance"]["config"]["surface"] == "sphere"
    text = (out / "residuals.csv").read_text().splitlines()
    assert text[0].startswith("# code_sha256=") and text[1].startswith("# config=")
    assert text[2] == "check,max_residual,tolerance,result"
    assert not (out / ".lock").exists()


def test_negative_mu_rejected_before_work(tmp_path, capsys):
    assert run(tmp_path, "verify-kernels", "--mu", "-1") == cli.EXIT_CONFIG
    assert not (tmp_path / "out").exists()
    assert "configuration error" in capsys.readouterr().err


def test_unknown_surface_names_key(tmp_path, capsys):
    assert run(tmp_path, "spectrum", "--surface", "torus") == cli.EXIT_CONFIG
    assert "surface" in capsys.readouterr().err


def test_unknown_key_named(tmp_path, capsys):
    assert run(tmp_path, "verify-kernels", "--frobnicate", "3") == cli.EXIT_CONFIG
    assert "frobnicate" in capsys.readouterr().err
    assert run(tmp_path, "verify-kernels", "--set", "colour=red") == cli.EXIT_CONFIG
    assert "colour" in capsys.readouterr().err


def test_bad_subcommand_and_values(tmp_path):
    assert cli.main(["explode"]) == cli.EXIT_CONFIG
    assert run(tmp_path, "spectrum", "--resolutions", "8,x") == cli.EXIT_CONFIG
    assert run(tmp_path, "spectrum", "--resolutions", "4,8,12") == cli.EXIT_CONFIG


def test_single_resolution_with_probe(tmp_path):
    assert run(tmp_path, "spectrum", "--resolutions", "16") == cli.EXIT_CONFIG
    assert run(tmp_path, "probe-compactness", "--resolutions", "8,12") == cli.EXIT_CONFIG


def test_memory_ceiling(tmp_path, capsys):
    assert run(tmp_path, "spectrum", *SMALL, "--memory_limit_mb", "5") == cli.EXIT_RESOURCE
    assert "resolution 8 needs" in capsys.readouterr().err
    code = run(tmp_path, "spectrum", "--resolutions", "8,10,64", "--memory-limit-mb", "500")
    assert code == cli.EXIT_RESOURCE
    assert "resolution 64" in capsys.readouterr().err


def test_lockfile(tmp_path, capsys):
    (tmp_path / "out").mkdir()
    (tmp_path / "out" / ".lock").write_text("123")
    assert run(tmp_path, "verify-kernels") == cli.EXIT_RESOURCE
    assert "locked" in capsys.readouterr().err


def test_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# fixture\nsurface = ellipsoid\nsurface.c = 3   # long axis\nlambda = 2\nseed = 5\n")
    ap = cli.build_parser()
    args, rest = ap.parse_known_args(["spectrum", "--config", str(cfg_file), "--mu", "2", "--probe-k", "7"])
    cfg = cli.load_config(args, cli._extra_settings(rest))
    assert (cfg.surface, cfg.surface_params, cfg.lam, cfg.mu, cfg.seed, cfg.probe_k) == (
        "ellipsoid", {"c": 3.0}, 2.0, 2.0, 5, 7)
    assert cfg.make_surface().describe()["c"] == 3.0
    with pytest.raises(ConfigError):
        cli.parse_config_text("surface ellipsoid")
    with pytest.raises(ConfigError):
        cli.parse_config_text("probe_compactness = maybe")


def test_spectrum_outputs_and_determinism(tmp_path):
    args = ["spectrum", *SMALL, "--probe-k", "5", "--seed", "3"]
    first = {}
    for attempt in range(2):
        code = run(tmp_path, *args)
        assert code in (cli.EXIT_OK, cli.EXIT_FAIL)
        out = tmp_path / "out"
        files = {p.name: p.read_bytes() for p in out.iterdir()}
        if attempt == 0:
            first = files
    assert set(first) == set(files)
    for name in files:
        if name == "report.json":
            a, b = json.loads(first[name]), json.loads(files[name])
            a["provenance"].pop("timestamp"), b["provenance"].pop("timestamp")
            assert a == b
        else:
            assert first[name] == files[name], name
    ev = np.loadtxt(tmp_path / "out" / "eigenvalues.csv")
    assert ev.ndim == 1 and len(ev) == 3 * 2 * 12 * 12 and np.all(np.diff(ev) >= 0)
    head = (tmp_path / "out" / "eigenvalues.csv").read_text().splitlines()[:2]
    assert head[0].startswith("# code_sha256=") and '"resolutions": [8, 10, 12]' in head[1]
    rep = json.loads(files["report.json"])
    assert len(rep["spectra"]) == 3 and set(rep["compactness"]) == {"p3", "K(K-k0)", "K(K+k0)", "K^2-k0^2"}
    summary = files["summary.txt"].decode()
    assert "n(-k0)" in summary and "p3" in summary


def test_probe_compactness_command(tmp_path):
    code = run(tmp_path, "probe-compactness", *SMALL, "--probe_k", "5")
    assert code in (cli.EXIT_OK, cli.EXIT_FAIL)
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["compactness"]["p3"]["resolutions"] == [8, 10, 12]
    assert any(c["name"] == "p3_to_K2_ratio_halves" for c in rep["checks"])


def test_verify_symbols_small(tmp_path):
    code = run(tmp_path, "verify-symbols", "--symbol_pairs", "6", "--sos_samples", "300")
    assert code == cli.EXIT_OK
    rows = (tmp_path / "out" / "symbol_samples.csv").read_text().splitlines()
    assert rows[0] == "chart,u1,u2,xi1,xi2,residual" and len(rows) > 300


def test_verify_riesz_small(tmp_path):
    code = run(tmp_path, "verify-riesz", "--riesz_grid", "128", "--symbol_pairs", "3", "--sos_samples", "300")
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    names = [c["name"] for c in rep["checks"]]
    assert {"flat_riesz_sum_of_squares", "halfspace_T3_minus_T", "composition_order"} <= set(names)
    assert code == cli.EXIT_OK


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "elastic_np", "verify-kernels", "--lambda", "abc",
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == cli.EXIT_CONFIG
    assert "lambda" in res.stderr
