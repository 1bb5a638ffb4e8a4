import csv
import json

import numpy as np
import pytest

from vicseklab.cli import (
    RunConfig,
    config_from_sources,
    main,
    parse_config_file,
    parse_t_grid,
)
from vicseklab.errors import ConfigError
from vicseklab.reports import load_report


def run_cli(*argv):
    return main(list(argv))


def test_build_subcommand(tmp_path):
    out = tmp_path / "g1.json"
    assert run_cli("build", "--level", "1", "--out", str(out)) == 0
    doc = json.loads(out.read_text())
    assert doc["version"] == 1
    assert len(doc["vertices"]) == 21
    assert len(doc["edges"]) == 20


def test_build_level_cap():
    assert run_cli("build", "--level", "9", "--out", "/tmp/never.json") == 2


def test_eig_subcommand(tmp_path, capsys):
    cache = tmp_path / "cache"
    out = tmp_path / "eigs.json"
    assert run_cli("eig", "--level", "1", "--cache", str(cache), "--out", str(out)) == 0
    assert any(cache.iterdir())
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1 and len(doc["eigenvalues"]) == 21
    assert doc["eigenvalues"][0] == 0.0
    # second run hits the cache (no recompute warning on stderr)
    capsys.readouterr()
    assert run_cli("eig", "--level", "1", "--cache", str(cache)) == 0
    assert "recomputing" not in capsys.readouterr().err


def test_kernel_subcommand(tmp_path):
    out = tmp_path / "kernel.csv"
    assert run_cli("kernel", "--level", "1", "--t", "0.01", "--source", "0",
                   "--out", str(out)) == 0
    with open(out) as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ["target_id", "distance", "p_t", "dpdt"]
    assert len(rows) == 22
    values = np.array([[float(r[1]), float(r[2]), float(r[3])] for r in rows[1:]])
    assert values[0, 0] == 0.0  # distance of the source to itself
    assert np.all(values[:, 1] > 0)


def test_verify_writes_reports_and_is_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out1.mkdir()
    cache = tmp_path / "cache"
    args = ["verify", "--level", "2", "--suite", "kernel", "--seed", "3",
            "--cache", str(cache), "--out", str(out1)]
    assert run_cli(*args) == 0
    r1 = (out1 / "report.json").read_bytes()
    assert run_cli(*args) == 0  # second run hits the eigen cache
    r2 = (out1 / "report.json").read_bytes()
    assert r1 == r2  # byte-identical given (config, code version)
    doc = load_report(out1 / "report.json")
    assert doc["schema"] == 1
    assert doc["config"]["level"] == 2
    assert {"solver_version", "residual_max", "ortho_defect"} <= set(doc["solver"])
    names = {c["check_name"] for c in doc["checks"]}
    assert "ondiagonal_decay" in names and "laplacian_is_minus_codiff_gradient" in names
    assert (out1 / "ondiagonal_decay.csv").exists()
    assert (out1 / "summary.txt").exists()
    with open(out1 / "ondiagonal_decay.csv") as fp:
        header = fp.readline().strip()
    assert header == "t,quantity,ratio,bound"


def test_report_json_is_strict(tmp_path):
    """Exploratory checks carry infinite tolerances; the wire format must
    still parse under strict JSON readers (no Infinity/NaN literals)."""
    out = tmp_path / "strict"
    out.mkdir()
    assert run_cli("verify", "--level", "2", "--suite", "riesz", "--suite", "sobolev",
                   "--out", str(out)) == 0
    text = (out / "report.json").read_text()
    assert "Infinity" not in text and "NaN" not in text

    def reject(name):
        raise AssertionError(f"non-finite literal {name} in report")

    json.loads(text, parse_constant=reject)


def test_verify_level2_kernel_is_fast(tmp_path):
    import time
    out = tmp_path / "fast"
    out.mkdir()
    t0 = time.time()
    assert run_cli("verify", "--level", "2", "--suite", "kernel", "--out", str(out)) == 0
    assert time.time() - t0 < 10.0


def test_verify_riesz_suite_never_gates_status(tmp_path):
    out = tmp_path / "r"
    out.mkdir()
    assert run_cli("verify", "--level", "1", "--suite", "riesz",
                   "--out", str(out)) == 0


def test_verify_missing_out_dir(tmp_path):
    missing = tmp_path / "nope"
    status = run_cli("verify", "--level", "1", "--suite", "riesz", "--out", str(missing))
    assert status == 2
    assert not missing.exists()  # no partial writes


def test_verify_custom_t_grid(tmp_path):
    out = tmp_path / "g"
    out.mkdir()
    assert run_cli("verify", "--level", "2", "--suite", "kernel", "--out", str(out),
                   "--t-grid", "1e-3:1e-2:log:15") == 0
    doc = load_report(out / "report.json")
    assert doc["config"]["t_grid"] == [1e-3, 1e-2, "log", 15]


def test_report_subcommand(tmp_path, capsys):
    out = tmp_path / "rep"
    out.mkdir()
    run_cli("verify", "--level", "1", "--suite", "riesz", "--out", str(out))
    capsys.readouterr()
    assert run_cli("report", "--dir", str(out)) == 0
    text = capsys.readouterr().out
    assert "riesz_ratio_experiment" in text
    assert "schema 1" in text


def test_parse_t_grid():
    assert parse_t_grid("1e-4:0.1:log:25") == (1e-4, 0.1, "log", 25)
    assert parse_t_grid("1:2:linear:5") == (1.0, 2.0, "linear", 5)
    for bad in ("1:2:3", "2:1:log:5", "1:2:cubic:5", "a:b:log:5", "0:1:log:5"):
        with pytest.raises(ConfigError):
            parse_t_grid(bad)


def test_config_file_and_flag_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# verification run\n"
        "level = 3\n"
        "suite = kernel,riesz\n"
        "seed = 11\n"
        "t-grid = 1e-3:1e-2:log:12\n"
        "c_sweep = 1.5,2\n"
        "out_dir = /tmp\n")
    import argparse
    ns = argparse.Namespace(config=str(cfg_file), level=2, suite=None, seed=None,
                            t_grid=None, cache=None, out=None)
    cfg = config_from_sources(ns)
    assert cfg.level == 2  # flag wins
    assert cfg.suites == ("kernel", "riesz")
    assert cfg.seed == 11
    assert cfg.t_grid == (1e-3, 1e-2, "log", 12)
    assert cfg.c_sweep == (1.5, 2.0)


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("level 3\n")
    with pytest.raises(ConfigError):
        parse_config_file(bad)
    with pytest.raises(ConfigError):
        parse_config_file(tmp_path / "missing.cfg")
    with pytest.raises(ConfigError):
        RunConfig(level=99).validate()
    with pytest.raises(ConfigError):
        RunConfig(suites=("bogus",)).validate()
    with pytest.raises(ConfigError):
        RunConfig(c_sweep=(0.5,)).validate()


def test_cache_mismatch_recomputes(tmp_path, capsys):
    cache = tmp_path / "cache"
    run_cli("eig", "--level", "1", "--cache", str(cache))
    # corrupt the cache: truncate the file
    for f in cache.iterdir():
        f.write_bytes(b"not a valid archive")
    capsys.readouterr()
    assert run_cli("eig", "--level", "1", "--cache", str(cache)) == 0
    assert "recomputing" in capsys.readouterr().err
