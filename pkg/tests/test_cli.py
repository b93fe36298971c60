import json

import numpy as np
import pytest
from scipy import stats

from conftest import synthetic_study, write_study
from taperfda import cli, io
from taperfda.flm import GroupLayout
from taperfda.fourier import CurveSet


def _run(*argv):
    return cli.main([str(a) for a in argv])


def test_test_command_detects_planted_frequency(planted_files, tmp_path, capsys):
    curves, meta = planted_files
    out = tmp_path / "report.csv"
    assert _run("test", "--input", curves, "--meta", meta, "--iters", 20000, "--seed", 3, "--out", out) == 0
    m, header, rows = io.read_table(out)
    assert header == ["j", "F", "p_value", "weight"]
    assert len(rows) == 65
    assert float(m["p_value"]) < 0.01
    assert m["statistic"] == "F_global = sum_{j=1}^{65} w_j F_j"
    assert m["nu"] == "2" and m["df2"] == "25"
    pv = [float(r[2]) for r in rows]
    assert int(np.argmin(pv)) + 1 == 7
    # the global statistic is recomputable from the table
    fg = sum(float(r[1]) * float(r[3]) for r in rows)
    assert fg == pytest.approx(float(m["F_global"]), rel=1e-12)
    assert "F_global" in capsys.readouterr().out


def test_null_p_values_are_uniform():
    pvals = []
    for seed in range(200):
        grid, values, groups, x = synthetic_study(1000 + seed, sizes=(5, 6, 4), r=64)
        curves = CurveSet(grid, values)
        rep = cli.run_test_workflow(curves, GroupLayout(groups, x), 21, iterations=2000, seed=seed)
        pvals.append(rep.p_value)
    assert stats.kstest(pvals, "uniform").statistic < 0.1


def test_decompose_command(planted_files, tmp_path):
    curves, _ = planted_files
    out = tmp_path / "d.csv"
    assert _run("decompose", "--input", curves, "--p", 3, "--out", out) == 0
    m, header, rows = io.read_table(out)
    assert header == ["j", "unit", "coefficient"]
    assert len(rows) == 3 * 31
    assert m["interpolated"] == "false"


def test_figure4_rows_and_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert _run("figure4", "--iters", 1000, "--seed", 9, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    m, header, rows = io.read_table(a)
    assert header == ["class", "index_value", "statistic", "power", "std_error"]
    assert len(rows) == 240
    assert m["seed"] == "9" and m["iterations"] == "1000"
    assert "timestamp" not in a.read_text().lower()


def test_power_command_with_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alternative": {"kind": "smooth", "b": 0.3},
                               "statistics": ["uwq", "an", "ht:s=1"], "null_iters": 4000}))
    out = tmp_path / "p.csv"
    assert _run("power", "--config", cfg, "--iters", 2000, "--weights", "fzz:s=1", "--out", out) == 0
    _, header, rows = io.read_table(out)
    assert [r[0] for r in rows] == ["uwq", "an", "ht:s=1", "fzz:s=1"]
    assert all(0 <= float(r[1]) <= 1 for r in rows)


def test_rates_command(tmp_path):
    out = tmp_path / "r.csv"
    assert _run("rates", "--out", out) == 0
    m, header, rows = io.read_table(out)
    assert header == ["n", "seq_i", "seq_ii", "delta_hat"]
    assert len(rows) == 15
    seq_i = np.array([float(r[1]) for r in rows])
    assert float(m["band_ratio_seq_i"]) == pytest.approx(seq_i.max() / seq_i.min())


def test_config_errors_are_aggregated(tmp_path, capsys):
    code = _run("test", "--input", tmp_path / "missing.csv", "--p", 0, "--alpha", 3, "--weights", "zzz")
    assert code == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    for text in ("input file not found", "meta is required", "p must be >= 1", "alpha", "weights"):
        assert text in err
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"bogus": 1, "s": 0.2}))
    assert _run("rates", "--config", bad) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "bogus" in err and "s must exceed" in err
    assert _run("nope") == cli.EXIT_CONFIG
    assert _run("figure4", "--iters", "abc") == cli.EXIT_CONFIG


def test_data_error_exit_code(tmp_path, planted_files):
    _, meta = planted_files
    f = tmp_path / "bad.csv"
    f.write_text("t,a\n1,2\n2,x\n")
    assert _run("decompose", "--input", f) == cli.EXIT_DATA
    assert _run("test", "--input", f, "--meta", meta) == cli.EXIT_DATA


def test_numerical_error_exit_code(tmp_path):
    # identical covariates within a group make the slope columns collinear
    grid, values, groups, _ = synthetic_study(1, sizes=(3, 3, 3), r=40)
    curves, meta = write_study(tmp_path, grid, values, groups, np.ones(9), stem="flat")
    assert _run("test", "--input", curves, "--meta", meta, "--p", 5, "--iters", 1000) == cli.EXIT_NUMERIC


def test_resolution_error_is_config(planted_files):
    curves, _ = planted_files
    assert _run("decompose", "--input", curves, "--p", 400) == cli.EXIT_CONFIG


def test_version_flag(capsys):
    assert _run("--version") == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
