import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

import floqent.dynamics
import floqent.rwa
from floqent.cli import main as cli_main
from floqent.config import LinkedParam, build_system, load_config
from floqent.errors import ConfigError
from floqent.sweep import (
    numeric_cbar,
    overlay_lines,
    run_dynamics,
    run_sweep,
)

BASE = """
[system]
delta1 = 0.1
delta2 = 0.15
eps1 = 3.0
eps2 = 6.0
g = 0.15

[drive]
amplitude = 5.0
omega = 1.0

[noise]
gamma1 = 1e-3
gamma2 = 1e-3
temperature_mk = 30.0
"""


def write_config(tmp_path, extra="", base=BASE):
    path = tmp_path / "run.ini"
    path.write_text(base + extra)
    return path


class TestConfig:
    def test_base_values(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        p = cfg.base_params()
        assert p.qubit1.eps == 3.0
        assert p.drive.amplitude == 5.0
        assert p.temperature == pytest.approx(30 * p.kb_conversion)

    def test_unknown_key_rejected_with_location(self, tmp_path):
        path = write_config(tmp_path, "\n[sweep]\nbogus = 1\n")
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert "sweep" in str(err.value) and "bogus" in str(err.value)

    def test_unknown_section_rejected(self, tmp_path):
        path = write_config(tmp_path, "\n[plotting]\nx = 1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_required_value(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[system]\ndelta1 = 0.1\n[drive]\namplitude = 1\nomega = 1\n")
        with pytest.raises(ConfigError) as err:
            load_config(path)
        assert "system" in str(err.value)

    def test_linked_expressions(self, tmp_path):
        path = write_config(
            tmp_path, "\n[sweep]\naxis1 = eps1 2.8 4.2 5\nlinked = eps2 = 2*eps1\n")
        cfg = load_config(path)
        link = cfg.sweep.linked[0]
        assert link == LinkedParam(name="eps2", coef=2.0, axis="eps1", const=0.0)

    def test_linked_must_reference_axis(self, tmp_path):
        path = write_config(
            tmp_path, "\n[sweep]\naxis1 = eps1 2.8 4.2 5\nlinked = eps2 = 2*g\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_linked_nonlinear_rejected(self, tmp_path):
        path = write_config(
            tmp_path,
            "\n[sweep]\naxis1 = eps1 2.8 4.2 5\nlinked = eps2 = eps1*eps1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_axis_needs_two_points(self, tmp_path):
        path = write_config(tmp_path, "\n[sweep]\naxis1 = eps1 2.8 4.2 1\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestRunSweep:
    def test_degenerate_grid_completes(self, tmp_path):
        path = write_config(
            tmp_path,
            "\n[sweep]\naxis1 = eps1 3.05 3.1 2\naxis2 = g 0.1 0.2 2\nmethod = numeric\n")
        cfg = load_config(path)
        out = tmp_path / "out"
        result = run_sweep(cfg, out, workers=1)
        assert len(result.records) == 4
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0] == "eps1,g,c_num,c_ana,tag,detuning,note"
        assert len(lines) == 5

    def test_deterministic_across_worker_counts(self, tmp_path):
        path = write_config(
            tmp_path, "\n[sweep]\naxis1 = eps1 3.05 3.25 5\nlinked = eps2 = 2*eps1\n")
        cfg = load_config(path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        run_sweep(cfg, out1, workers=1)
        run_sweep(cfg, out2, workers=2)
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()

    def test_dispatch_tags_and_blocked_points(self, tmp_path):
        # 3.333 -> two-qubit gate (rwa); 3.05 -> clean (nonres);
        # 2.85 -> single-qubit window (blocked, recorded, not fatal)
        path = write_config(
            tmp_path, "\n[sweep]\naxis1 = eps1 2.85 2.85 2\nlinked = eps2 = 2*eps1\n")
        cfg = load_config(path)
        spec = cfg.sweep
        for eps1, expected in ((3.05, "nonres"), (10 / 3, "rwa"), (2.85, "blocked")):
            ax = dataclasses.replace(spec.axis1, lo=eps1, hi=eps1 + 1e-6)
            cfg.sweep = dataclasses.replace(spec, axis1=ax)
            result = run_sweep(cfg, None, workers=1)
            assert result.records[0].tag == expected
            if expected == "blocked":
                assert result.records[0].note
                assert result.records[0].c_num is not None

    def test_numeric_only_method(self, tmp_path):
        path = write_config(
            tmp_path,
            "\n[sweep]\naxis1 = eps1 3.05 3.1 2\nmethod = numeric\n")
        cfg = load_config(path)
        result = run_sweep(cfg, None, workers=1)
        assert all(r.tag == "numeric" and r.c_ana is None for r in result.records)


class TestRunDynamics:
    def test_three_rates_entry_ordering(self, tmp_path):
        path = write_config(
            tmp_path,
            "\n[sweep]\ngammas = 2e-3 8e-3 3e-2\nsamples_per_period = 4\n")
        cfg = load_config(path)
        out = tmp_path / "dyn"
        entries = run_dynamics(cfg, out)
        periods = [entries[f"gamma_{g:g}"]["entry_period"]
                   for g in (2e-3, 8e-3, 3e-2)]
        assert periods[0] > periods[1] > periods[2]
        for g in (2e-3, 8e-3, 3e-2):
            assert (out / f"dynamics_gamma_{g:g}.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "dynamics"

    def test_no_tunneling_means_no_concurrence(self, tmp_path):
        base = BASE.replace("delta1 = 0.1", "delta1 = 0.0")
        path = write_config(tmp_path, "\n[sweep]\ngammas = 1e-2\n", base=base)
        out = tmp_path / "dyn"
        run_dynamics(load_config(path), out)
        rows = (out / "dynamics_gamma_0.01.csv").read_text().strip().splitlines()[1:]
        c_values = [float(r.split(",")[1]) for r in rows]
        assert max(c_values) < 1e-6

    def test_zero_rates_rejected(self, tmp_path):
        base = BASE.replace("gamma1 = 1e-3", "gamma1 = 0").replace(
            "gamma2 = 1e-3", "gamma2 = 0").replace(
            "temperature_mk = 30.0", "temperature_mk = 0")
        path = write_config(tmp_path, "\n[sweep]\nsamples_per_period = 4\n",
                            base=base)
        with pytest.raises(ConfigError):
            run_dynamics(load_config(path), tmp_path / "dyn")

    def test_rho_dump_schema(self, tmp_path):
        path = write_config(
            tmp_path, "\n[sweep]\ngammas = 3e-2\nsamples_per_period = 2\n")
        out = tmp_path / "dyn"
        run_dynamics(load_config(path), out, dump_rho=True)
        header = (out / "rho_gamma_0.03.csv").read_text().splitlines()[0]
        cols = header.split(",")
        assert cols[0] == "t_ns" and len(cols) == 1 + 32
        assert "re00" in cols and "im33" in cols


class TestOverlayLines:
    def test_1d_line_positions(self, tmp_path):
        path = write_config(
            tmp_path, "\n[sweep]\naxis1 = eps1 2.8 4.2 561\nlinked = eps2 = 2*eps1\n")
        lines = overlay_lines(load_config(path))
        vals = {}
        for ln in lines:
            vals.setdefault((ln["kind"], ln.get("qubit"), ln["extended"]), []).append(
                ln["value"])
        # qubit-1 (+g): eps1 = k - 0.15; qubit-2 (+g): (k - 0.15)/2; two: k/3
        assert sorted(np.round(vals[("single", 1, False)], 6)) == [2.85, 3.85]
        assert sorted(np.round(vals[("single", 2, False)], 6)) == [2.925, 3.425, 3.925]
        assert sorted(np.round(vals[("two", None, False)], 6)) == [
            3.0, round(10 / 3, 6), round(11 / 3, 6), 4.0]

    def test_2d_segments_clip_to_window(self, tmp_path):
        path = write_config(
            tmp_path,
            "\n[sweep]\naxis1 = g 0.0 0.6 11\naxis2 = eps1 2.8 4.2 11\n"
            "linked = eps2 = 2*eps1\nmethod = numeric\n")
        lines = overlay_lines(load_config(path))
        assert lines
        for ln in lines:
            for x, y in ln["points"]:
                assert -1e-9 <= x - 0.0 and x - 0.6 <= 1e-9
                assert -1e-9 <= y - 2.8 and y - 4.2 <= 1e-9
        # the two-qubit lines are independent of g: vertical segments
        two = [ln for ln in lines if ln["kind"] == "two"]
        assert two
        for ln in two:
            (x0, y0), (x1, y1) = ln["points"]
            assert abs(y0 - y1) < 1e-9


class TestCli:
    def test_resonances_writes_overlay(self, tmp_path, capsys):
        path = write_config(
            tmp_path, "\n[sweep]\naxis1 = eps1 2.8 4.2 11\nlinked = eps2 = 2*eps1\n")
        out = tmp_path / "res"
        rc = cli_main(["resonances", "--config", str(path), "--out", str(out)])
        assert rc == 0
        data = json.loads((out / "resonances.json").read_text())
        assert data["lines"]

    def test_sweep_manifest_has_config_hash(self, tmp_path):
        path = write_config(
            tmp_path, "\n[sweep]\naxis1 = eps1 3.05 3.1 2\nmethod = numeric\n")
        out = tmp_path / "sw"
        rc = cli_main(["sweep", "--config", str(path), "--out", str(out),
                       "--workers", "1"])
        assert rc == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["config_sha256"]) == 64
        assert manifest["method"] == "numeric"

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, "\n[sweep]\nbogus = 1\n")
        rc = cli_main(["sweep", "--config", str(path), "--out", str(tmp_path / "x")])
        assert rc == 2
        assert "bogus" in capsys.readouterr().err


class TestVerify:
    def test_suite_passes(self):
        from floqent.verify import run_verify

        results, ok = run_verify()
        assert ok, [r.name for r in results if not r.passed]

    def test_mutation_corner_sign_flip_detected(self, monkeypatch):
        # flip the corner coherence the closed form reports: the explicit
        # generator no longer annihilates it and the oracle check trips
        from floqent.verify import run_verify

        original = floqent.rwa._steady_state_from_elements

        def mutated(params, el):
            ss = original(params, el)
            return dataclasses.replace(ss, r14=-ss.r14)

        monkeypatch.setattr(floqent.rwa, "_steady_state_from_elements", mutated)
        results, ok = run_verify()
        assert not ok
        failed = {r.name for r in results if not r.passed}
        assert "rwa_stationarity" in failed

    def test_mutation_trace_leak_detected(self, monkeypatch):
        from floqent.verify import run_verify

        original = floqent.dynamics.liouvillian_parts

        def leaky(params):
            L0, L1 = original(params)
            return L0 + 1e-6 * np.eye(16), L1

        monkeypatch.setattr(floqent.dynamics, "liouvillian_parts", leaky)
        results, ok = run_verify()
        assert not ok
        failed = {r.name for r in results if not r.passed}
        assert "trace_drift_50_periods" in failed


def test_numeric_cbar_matches_module_average(fig1_params, integrator):
    from floqent.concurrence import averaged_concurrence_numeric

    a = numeric_cbar(fig1_params, integrator, n_time=64)
    b = averaged_concurrence_numeric(fig1_params, integrator)
    assert abs(a - b) < 1e-12
