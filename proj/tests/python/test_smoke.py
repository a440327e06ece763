"""Smoke tests for the python bindings (and CLI exit codes)."""

import math
import os
import subprocess
import sys

import pytest

import ctstokes


def test_mesh_counts_follow_euler():
    mesh = ctstokes.build_structured_mesh(ctstokes.Rect(), 4, 3)
    assert mesh.num_vertices == 5 * 4
    assert mesh.num_triangles == 2 * 4 * 3
    assert mesh.num_vertices - mesh.num_edges + mesh.num_triangles == 1
    stats = mesh.statistics()
    assert stats.total_area == pytest.approx(4.0, rel=1e-12)
    assert mesh.boundary_vertex_count == 2 * (4 + 3)


def test_analytic_solution_properties():
    case = ctstokes.AnalyticStokes(lam=3.0, mu=1.0)
    assert case.velocity(0.0, 0.3, -0.4) == (0.0, 0.0)
    assert case.velocity(0.7, 1.0, 0.25) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert case.divergence(0.9, 0.21, 0.53) == pytest.approx(0.0, abs=1e-12)
    assert case.pressure(0.3, 0.0, 0.5) == pytest.approx(math.sin(3.0 * 0.3), rel=1e-12)


def test_config_validation():
    config = ctstokes.ExperimentConfig()
    assert config.lam == 10.0
    assert config.T == 3.0
    assert config.dt_list == [0.1, 0.05, 0.025, 0.0125, 0.00625]
    assert config.steps_for(0.1) == 30
    with pytest.raises(RuntimeError):
        ctstokes.parse_config_text("dt_list = 0.3\nT = 1\n")
    with pytest.raises(RuntimeError):
        ctstokes.parse_config_text("no_such_key = 1\n")


def small_config(**overrides):
    config = ctstokes.ExperimentConfig()
    config.nx = config.ny = 6
    config.T = 0.2
    config.dt_list = [0.1, 0.05]
    for key, value in overrides.items():
        setattr(config, key, value)
    return config


def test_run_experiment_rows():
    rows = ctstokes.run_experiment(small_config())
    assert len(rows) == 2 + 4
    final = rows[1]
    assert final.t_checkpoint == pytest.approx(0.2, rel=1e-12)
    assert final.error_total == pytest.approx(final.error_grad_sq + final.error_dual_sq, rel=1e-15)
    assert final.est2 > 0.0
    assert math.isfinite(final.eff2)


def test_zero_data_is_flagged():
    rows = ctstokes.run_experiment(small_config(lam=0.0))
    for row in rows:
        assert row.est1 == 0.0 and row.est2 == 0.0 and row.est3 == 0.0
        assert row.error_total == 0.0
        assert math.isnan(row.eff2)


def test_determinism_and_csv():
    first = ctstokes.csv_text(ctstokes.run_experiment(small_config()))
    second = ctstokes.csv_text(ctstokes.run_experiment(small_config()))
    assert first == second
    header = first.splitlines()[0]
    assert header.startswith("lambda,dt,T_checkpoint,est1,est2,est3,linf_term")
    blocks = ctstokes.gnuplot_eff2_text(ctstokes.run_experiment(small_config()))
    data_lines = [l for l in blocks.splitlines() if l and not l.startswith("#")]
    assert all(len(l.split()) == 2 for l in data_lines)


def test_selftest_passes():
    failures, report = ctstokes.selftest()
    assert failures == 0, report


def cli_path():
    candidates = [
        os.environ.get("CTSTOKES_CLI", ""),
        os.path.join(os.path.dirname(__file__), "..", "..", "build", "ctstokes"),
    ]
    for c in candidates:
        if c and os.path.exists(c):
            return c
    return None


@pytest.mark.skipif(cli_path() is None, reason="CLI binary not built")
def test_cli_exit_codes(tmp_path):
    cli = cli_path()
    out = tmp_path / "out.csv"
    ok = subprocess.run(
        [cli, "run", "--nx", "4", "--ny", "4", "--T", "0.2", "--dt", "0.1", "--out", str(out)],
        capture_output=True,
    )
    assert ok.returncode == 0, ok.stderr.decode()
    assert out.exists()

    bad_config = subprocess.run([cli, "run", "--dt", "-0.1"], capture_output=True)
    assert bad_config.returncode == 2

    missing_file = subprocess.run([cli, "run", "--config", "/nonexistent.cfg"], capture_output=True)
    assert missing_file.returncode == 2

    info = subprocess.run([cli, "mesh-info", "--nx", "2", "--ny", "2"], capture_output=True)
    assert info.returncode == 0
    assert b"vertices: 9" in info.stdout
