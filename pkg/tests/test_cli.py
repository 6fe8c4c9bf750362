"""End-to-end command-line checks via subprocess."""

import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "causalboot.cli"]


def run_cli(*args, env_extra=None):
    import os

    env = dict(os.environ)
    env["CAUSAL_BOOT_WORKERS"] = "2"
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        CLI + [str(a) for a in args], capture_output=True, text=True, env=env
    )


@pytest.fixture
def confounder_graph(tmp_path):
    path = tmp_path / "graph.txt"
    path.write_text("U->Y; U->X; Y->X\n")
    return path


def test_dsep_queries(tmp_path, confounder_graph):
    out = run_cli("dsep", "--graph", confounder_graph, "--a", "X", "--b", "Y")
    assert out.returncode == 0 and out.stdout.strip() == "false"
    chain = tmp_path / "chain.txt"
    chain.write_text("A->B; B->C\n")
    out = run_cli("dsep", "--graph", chain, "--a", "A", "--b", "C", "--given", "B")
    assert out.returncode == 0 and out.stdout.strip() == "true"


def test_identify_prints_estimand(confounder_graph):
    out = run_cli(
        "identify", "--graph", confounder_graph, "--outcome", "X", "--do", "Y"
    )
    assert out.returncode == 0
    assert out.stdout.strip() == "Σ_{u} P(u) P(x|u,y)"


def test_identify_unidentifiable_exit_code(tmp_path):
    path = tmp_path / "bow.txt"
    path.write_text("Y->X; Y<->X\n")
    out = run_cli("identify", "--graph", path, "--outcome", "X", "--do", "Y")
    assert out.returncode == 2
    assert out.stdout.startswith("UNIDENTIFIABLE:")


def test_missing_graph_file_is_input_error(tmp_path):
    out = run_cli("dsep", "--graph", tmp_path / "nope.txt", "--a", "A", "--b", "B")
    assert out.returncode == 1
    assert "error:" in out.stderr


def simulate_csv(tmp_path, name, *extra):
    path = tmp_path / name
    out = run_cli(
        "simulate",
        "--scenario", "a",
        "--regime", "conf",
        "--n", 200,
        "--qc", 0.9,
        "--seed", 5,
        "--out", path,
        *extra,
    )
    assert out.returncode == 0, out.stderr
    return path


def test_simulate_schema_and_determinism(tmp_path):
    a = simulate_csv(tmp_path, "a.csv")
    b = simulate_csv(tmp_path, "b.csv")
    lines = a.read_text().splitlines()
    assert lines[0] == ",".join([f"x{j}" for j in range(10)] + ["y", "u"])
    assert len(lines) == 201
    assert a.read_bytes() == b.read_bytes()


def test_simulate_hides_shadow_columns_behind_prefix(tmp_path):
    path = tmp_path / "c.csv"
    out = run_cli(
        "simulate", "--scenario", "c", "--n", 50, "--seed", 1, "--out", path
    )
    assert out.returncode == 0
    header = path.read_text().splitlines()[0]
    assert header.endswith("y,u,z,_v")
    path = tmp_path / "d.csv"
    out = run_cli(
        "simulate", "--scenario", "d", "--n", 50, "--seed", 1, "--out", path
    )
    assert out.returncode == 0
    assert path.read_text().splitlines()[0].endswith("y,z,_u")


def test_simulate_discrete_mode(tmp_path):
    path = tmp_path / "disc.csv"
    out = run_cli(
        "simulate",
        "--scenario", "a",
        "--n", 40,
        "--seed", 2,
        "--out", path,
        "--x-mode", "discrete",
        "--x-support", 4,
    )
    assert out.returncode == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "x0,y,u"
    codes = {int(line.split(",")[0]) for line in lines[1:]}
    assert codes <= {0, 1, 2, 3}


def test_bootstrap_cb_round_trip(tmp_path):
    src = simulate_csv(tmp_path, "train.csv")
    out_a = tmp_path / "cb_a.csv"
    out_b = tmp_path / "cb_b.csv"
    for out_path in (out_a, out_b):
        out = run_cli(
            "bootstrap",
            "--scenario", "a",
            "--method", "cb",
            "--in", src,
            "--out", out_path,
            "--seed", 7,
        )
        assert out.returncode == 0, out.stderr
    lines = out_a.read_text().splitlines()
    assert lines[0] == ",".join(f"x{j}" for j in range(10)) + ",y"
    assert out_a.read_bytes() == out_b.read_bytes()


def test_bootstrap_da_and_smoothing_kernel_flags(tmp_path):
    src = simulate_csv(tmp_path, "train.csv")
    out = run_cli(
        "bootstrap",
        "--scenario", "a",
        "--method", "da",
        "--in", src,
        "--out", tmp_path / "da.csv",
        "--seed", 3,
    )
    assert out.returncode == 0, out.stderr
    out = run_cli(
        "bootstrap",
        "--scenario", "a",
        "--method", "cb",
        "--in", src,
        "--out", tmp_path / "smooth.csv",
        "--seed", 3,
        "--smoothing", 0.5,
        "--kernel", "gaussian:0.05",
    )
    assert out.returncode == 0, out.stderr


def test_bootstrap_zero_support_exit_code(tmp_path):
    src = tmp_path / "degenerate.csv"
    src.write_text("x0,y,u\n0.1,1,1\n0.2,1,1\n0.3,0,0\n0.4,0,0\n")
    out = run_cli(
        "bootstrap",
        "--scenario", "a",
        "--method", "da",
        "--in", src,
        "--out", tmp_path / "out.csv",
        "--seed", 1,
    )
    assert out.returncode == 3
    assert "empty stratum" in out.stderr


def test_bootstrap_input_validation_exit_code(tmp_path):
    src = tmp_path / "no_u.csv"
    src.write_text("x0,y\n0.1,1\n0.2,0\n")
    out = run_cli(
        "bootstrap",
        "--scenario", "a",
        "--method", "cb",
        "--in", src,
        "--out", tmp_path / "out.csv",
        "--seed", 1,
    )
    assert out.returncode == 1
    assert "missing u" in out.stderr
    src = tmp_path / "odd.csv"
    src.write_text("x0,y,mystery\n0.1,1,9\n")
    out = run_cli(
        "bootstrap",
        "--scenario", "a",
        "--method", "cb",
        "--in", src,
        "--out", tmp_path / "out.csv",
        "--seed", 1,
    )
    assert out.returncode == 1
    assert "unknown columns" in out.stderr


def test_simulate_output_feeds_bootstrap(tmp_path):
    path = tmp_path / "c.csv"
    out = run_cli(
        "simulate", "--scenario", "c", "--n", 300, "--seed", 4, "--out", path
    )
    assert out.returncode == 0
    out = run_cli(
        "bootstrap",
        "--scenario", "c",
        "--method", "cb",
        "--in", path,
        "--out", tmp_path / "debiased.csv",
        "--seed", 4,
    )
    assert out.returncode == 0, out.stderr


def run_spec(tmp_path, text, name="spec.txt", out="out"):
    spec = tmp_path / name
    spec.write_text(text)
    return run_cli("run", "--spec", spec, "--out", tmp_path / out), tmp_path / out


def test_run_writes_results_and_resolved_spec(tmp_path):
    text = (
        "scenarios=a\nqc_grid=0.95\nmethods=simple\nseeds=0\n"
        "n_train=200\nn_test=200\ntrain.epochs=5\n"
    )
    result, out_dir = run_spec(tmp_path, text)
    assert result.returncode == 0, result.stderr
    results = out_dir / "results.csv"
    resolved = out_dir / "spec.resolved.txt"
    assert results.exists() and resolved.exists()
    assert len(results.read_text().splitlines()) == 1 + 4
    assert "train.epochs=5" in resolved.read_text()
    again, out_dir2 = run_spec(tmp_path, text, name="spec2.txt", out="out2")
    assert again.returncode == 0
    assert results.read_bytes() == (out_dir2 / "results.csv").read_bytes()


def test_run_reports_failed_cells(tmp_path):
    text = (
        "scenarios=a\nqc_grid=0.95\nmethods=simple\nseeds=0\n"
        "n_train=100\nn_test=100\ntrain.epochs=2\nsim.feature_dim=2\n"
    )
    result, out_dir = run_spec(tmp_path, text)
    assert result.returncode == 4
    assert "cells failed" in result.stderr
    content = (out_dir / "results.csv").read_text()
    assert "error:" in content


def test_run_rejects_bad_spec(tmp_path):
    result, _ = run_spec(tmp_path, "scenarios=a\nwidgets=9\n")
    assert result.returncode == 2
    assert "unknown spec key" in result.stderr
