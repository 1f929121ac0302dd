import json

import numpy as np

from eulerlab import SamplingSpec, verify
from eulerlab.config import build_run_config
from eulerlab.diagnostics import fit_blowup_exponent, gradient_history
from eulerlab.reporting import (SNAPSHOT_HEADER, TRACE_HEADER, build_report,
                                config_echo, read_csv_columns, write_report,
                                write_snapshot_csv, write_trajectory_csv)
from eulerlab.simulator import AnnulusGrid, exact_swirl_field
from eulerlab import trajectory_closed_form


def small_spec(count=40, seed=6):
    return SamplingSpec(r_lo=0.5, r_hi=2.0, z_lo=-1.0, z_hi=1.0,
                        t_hi=None, count=count, seed=seed)


class TestReportDocument:
    def test_structure(self, preset):
        cfg = build_run_config()
        res = verify(preset, spec=small_spec())
        times = [0.0, 0.3, 0.6, 0.8]
        fit = fit_blowup_exponent(
            gradient_history(preset, times, entry=(2, 2)), preset.t_star)
        report = build_report(cfg, residual_report=res,
                              fits=[("sup_grad_v", fit)],
                              bkm=[(0.5, 0.693)],
                              pass_flags=[True])
        assert report["pass"] is True
        assert report["config"]["a"] == 1.0
        row = report["residuals"][0]
        assert set(row) == {"equation", "max_abs_residual", "argmax",
                            "samples"}
        assert set(row["argmax"]) == {"t", "r", "z"}
        fit_row = report["fits"][0]
        assert fit_row["quantity"] == "sup_grad_v"
        assert set(fit_row) >= {"exponent", "prefactor",
                                "rms_log_residual"}
        assert report["bkm"] == [{"t1": 0.5, "value": 0.693}]

    def test_config_echo_is_flat_and_json_safe(self):
        echo = config_echo(build_run_config())
        json.dumps(echo)
        assert echo["variant"] == "euler_self_similar"
        assert echo["seed"] == 20260819

    def test_byte_identical_across_runs(self, preset, tmp_path):
        cfg = build_run_config()
        paths = []
        for name in ("one.json", "two.json"):
            res = verify(preset, spec=small_spec())
            report = build_report(cfg, residual_report=res,
                                  pass_flags=[res.passed])
            path = tmp_path / name
            write_report(str(path), report)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_document_shape_on_disk(self, preset, tmp_path):
        cfg = build_run_config()
        path = tmp_path / "report.json"
        write_report(str(path), build_report(cfg, pass_flags=[True]))
        text = path.read_text()
        assert text.endswith("\n")
        doc = json.loads(text)
        # keys are sorted for diff-ability
        assert list(doc) == sorted(doc)


class TestCsv:
    def test_trajectory_file(self, preset, tmp_path):
        traj = trajectory_closed_form(preset, 0.0, 1.0, 0.5, 0.5,
                                      samples=21)
        path = tmp_path / "trace.csv"
        write_trajectory_csv(str(path), preset, traj)
        lines = path.read_text().splitlines()
        assert lines[0] == TRACE_HEADER
        assert len(lines) == 22
        cols = read_csv_columns(str(path))
        assert set(cols) == {"t", "r", "z", "r_vtheta"}
        assert np.allclose(cols["t"], traj.times)
        assert np.allclose(cols["r_vtheta"], 1.0, atol=1e-12)

    def test_snapshot_file_node_order(self, preset, tmp_path):
        grid = AnnulusGrid(0.5, 2.0, -1.0, 1.0, 8, 8)
        snap = exact_swirl_field(preset, grid, 0.25)
        path = tmp_path / "snapshot.csv"
        write_snapshot_csv(str(path), preset, snap)
        lines = path.read_text().splitlines()
        assert lines[0] == SNAPSHOT_HEADER
        assert len(lines) == 1 + 8 * 8
        cols = read_csv_columns(str(path))
        # radial index outermost, axial index innermost
        assert np.allclose(cols["r"][:8], grid.r_nodes()[0])
        assert np.allclose(cols["z"][:8], grid.z_nodes())
        assert np.abs(cols["abs_err"]).max() == 0.0

    def test_round_trip_precision(self, preset, tmp_path):
        # repr-formatted floats survive the round trip bit for bit
        traj = trajectory_closed_form(preset, 0.0, 1.234567890123,
                                      0.5, 0.5, samples=11)
        path = tmp_path / "trace.csv"
        write_trajectory_csv(str(path), preset, traj)
        cols = read_csv_columns(str(path))
        assert np.array_equal(cols["r"], traj.r)
        assert np.array_equal(cols["z"], traj.z)
