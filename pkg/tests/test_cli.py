"""Command-line client: subcommands, formats, exit codes, config files."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from tukeyreduce import read_weighted_csv
from tukeyreduce.cli import main

runner = CliRunner()


@pytest.fixture(scope="module")
def gen_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "inst.csv"
    result = runner.invoke(main, ["gen", "--n", "100", "--d", "2",
                                  "--seed", "3", "-o", str(path)])
    assert result.exit_code == 0, result.output
    return path


def test_gen_deterministic(tmp_path):
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    for p in (p1, p2):
        result = runner.invoke(main, ["gen", "--n", "20", "--d", "2",
                                      "--seed", "1", "-o", str(p)])
        assert result.exit_code == 0
    assert p1.read_text() == p2.read_text()
    assert len(p1.read_text().strip().split("\n")) == 20


def test_sample_writes_weighted_csv(gen_csv, tmp_path):
    out = tmp_path / "sampled.csv"
    result = runner.invoke(main, [
        "sample", "-i", str(gen_csv), "--loss", "tukey", "--tau", "2",
        "--rows", "20", "--seed", "0", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "kept" in result.output
    w, a, b = read_weighted_csv(out)
    assert 3 <= len(b) <= 20
    assert a.shape[1] == 2
    assert np.all(w >= 1.0 - 1e-12)


def test_sketch_writes_weighted_csv(gen_csv, tmp_path):
    out = tmp_path / "sketched.csv"
    result = runner.invoke(main, [
        "sketch", "-i", str(gen_csv), "--m", "4", "--b", "2", "--c", "2",
        "--seed", "0", "-o", str(out)])
    assert result.exit_code == 0, result.output
    w, a, b = read_weighted_csv(out)
    assert a.shape[1] == 2
    assert len(b) == len(w)
    assert np.all(w > 0)


def test_sketch_rows_cap(gen_csv, tmp_path):
    out = tmp_path / "capped.csv"
    result = runner.invoke(main, [
        "sketch", "-i", str(gen_csv), "--rows-cap", "64", "-o", str(out)])
    assert result.exit_code == 0, result.output
    w, _, _ = read_weighted_csv(out)
    assert len(w) <= 64


def test_solve_plain_json(gen_csv):
    result = runner.invoke(main, [
        "solve", "-i", str(gen_csv), "--plain", "--loss", "tukey",
        "--tau", "2", "--restarts", "3"])
    assert result.exit_code == 0, result.output
    body = json.loads(result.output)
    assert len(body["x"]) == 2
    assert body["objective"] >= 0.0


def test_solve_weighted_pipeline(gen_csv, tmp_path):
    sampled = tmp_path / "sampled.csv"
    runner.invoke(main, ["sample", "-i", str(gen_csv), "--loss", "tukey",
                         "--tau", "2", "--rows", "25", "-o", str(sampled)])
    out = tmp_path / "x.csv"
    result = runner.invoke(main, [
        "solve", "-i", str(sampled), "--loss", "tukey", "--tau", "2",
        "--restarts", "3", "--format", "csv", "-o", str(out)])
    assert result.exit_code == 0, result.output
    fields = out.read_text().strip().split(",")
    assert len(fields) == 3  # x1, x2, objective


def test_solve_grid_method(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("1,0\n1,0\n1,0\n1,100\n")
    result = runner.invoke(main, [
        "solve", "-i", str(path), "--plain", "--loss", "clipped",
        "--tau", "1", "--p", "2", "--method", "grid"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output)["objective"] == pytest.approx(1.0,
                                                                   abs=1e-6)


def test_solve_flat_start_exits_3(tmp_path):
    path = tmp_path / "flat.csv"
    path.write_text("1,1000\n1,-1000\n")
    result = runner.invoke(main, [
        "solve", "-i", str(path), "--plain", "--loss", "tukey",
        "--tau", "0.001", "--restarts", "2"])
    assert result.exit_code == 3
    assert "error" in result.stderr


def test_bad_parameters_exit_2(gen_csv, tmp_path):
    # target below d+1 is rejected by the service as a parameter error
    result = runner.invoke(main, [
        "sample", "-i", str(gen_csv), "--loss", "tukey", "--tau", "2",
        "--rows", "2", "-o", str(tmp_path / "x.csv")])
    assert result.exit_code == 2
    assert "error" in result.stderr

    result = runner.invoke(main, [
        "solve", "-i", str(tmp_path / "nope.csv"), "--plain"])
    assert result.exit_code == 2

    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    result = runner.invoke(main, ["solve", "-i", str(bad), "--plain"])
    assert result.exit_code == 2
    assert "error" in result.stderr


def test_reduce_sat(tmp_path):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 4 2\n1 2 -3 0\n-1 3 4 0\n")
    out = tmp_path / "inst.csv"
    man = tmp_path / "manifest.json"
    result = runner.invoke(main, [
        "reduce-sat", "--cnf", str(cnf), "--tau", "1", "--kind", "clipped",
        "-o", str(out), "--manifest", str(man)])
    assert result.exit_code == 0, result.output
    assert "18" in result.output  # 9 rows per clause
    manifest = json.loads(man.read_text())
    assert manifest["rows"] == 18
    assert manifest["satisfiable_cost"] == pytest.approx(10.0)
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 18


def test_reduce_sat_bad_cnf_exits_2(tmp_path):
    cnf = tmp_path / "bad.cnf"
    cnf.write_text("p cnf 3 1\n1 2 0\n")
    result = runner.invoke(main, [
        "reduce-sat", "--cnf", str(cnf), "-o", str(tmp_path / "x.csv")])
    assert result.exit_code == 2
    assert "error" in result.stderr


BENCH_ARGS = ["bench", "--n", "60", "--d", "2", "--loss", "tukey",
              "--tau", "2", "--sizes", "15", "--methods", "rowsample",
              "--reps", "1", "--restarts", "2", "--seed", "0",
              "--threads", "1"]


def test_bench_outputs(tmp_path):
    out = tmp_path / "bench.csv"
    summary = tmp_path / "summary.json"
    plot = tmp_path / "plot.csv"
    result = runner.invoke(main, BENCH_ARGS + [
        "-o", str(out), "--summary-json", str(summary),
        "--plot-data", str(plot)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "method,size,rep,ratio,wall_time_ms"
    assert len(lines) == 2
    assert lines[1].startswith("rowsample,15,0,")
    body = json.loads(summary.read_text())
    assert body["summary"][0]["method"] == "rowsample"
    plot_lines = plot.read_text().strip().split("\n")
    assert plot_lines[0] == "method,size,best_ratio"
    assert plot_lines[1].startswith("rowsample,15,")


def test_bench_stdout_default():
    result = runner.invoke(main, BENCH_ARGS)
    assert result.exit_code == 0, result.output
    assert result.output.startswith("method,size,rep,ratio,wall_time_ms")


def test_bench_config_file_defaults_and_precedence(tmp_path):
    config = tmp_path / "bench.cfg"
    config.write_text(
        "# small sweep\n"
        "n = 60\nd = 2\nloss = tukey\ntau = 2.0\nsizes = 15\n"
        "methods = rowsample\nreps = 1\nrestarts = 2\nthreads = 1\n")
    out1 = tmp_path / "r1.csv"
    result = runner.invoke(main, ["bench", "--config", str(config),
                                  "-o", str(out1)])
    assert result.exit_code == 0, result.output
    assert out1.read_text().strip().split("\n")[1].startswith("rowsample,15,")

    # explicit flags override config values
    out2 = tmp_path / "r2.csv"
    result = runner.invoke(main, ["bench", "--config", str(config),
                                  "--sizes", "20", "-o", str(out2)])
    assert result.exit_code == 0, result.output
    assert out2.read_text().strip().split("\n")[1].startswith("rowsample,20,")


def test_bench_config_unknown_key_exits_2(tmp_path):
    config = tmp_path / "bad.cfg"
    config.write_text("n = 60\nwidgets = 7\n")
    result = runner.invoke(main, ["bench", "--config", str(config)])
    assert result.exit_code == 2
    assert "error" in result.stderr


def test_size_below_dimension_exits_2():
    result = runner.invoke(main, ["bench", "--n", "60", "--d", "2",
                                  "--sizes", "2", "--methods", "rowsample",
                                  "--reps", "1"])
    assert result.exit_code == 2
    assert "error" in result.stderr
