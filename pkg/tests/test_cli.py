import json

from eulerlab import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def load_report(outdir):
    with open(outdir / "report.json") as fh:
        return json.load(fh)


class TestVerifyCommand:
    def test_pass_run_writes_artifacts(self, tmp_path, capsys):
        code, out, _ = run(["verify", "--count", "80", "--seed", "5",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert "[PASS]" in out and "[FAIL]" not in out
        assert (tmp_path / "report.json").is_file()
        assert (tmp_path / "residuals.png").is_file()
        report = load_report(tmp_path)
        assert report["pass"] is True
        assert report["config"]["seed"] == 5

    def test_zero_stretch_rate_is_a_usage_error(self, tmp_path, capsys):
        code, _, err = run(["verify", "--a", "0",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 2
        assert "a must be nonzero" in err

    def test_unknown_equation_is_a_usage_error(self, tmp_path, capsys):
        code, _, err = run(["verify", "--equations", "Bogus",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 2
        assert "unknown equation" in err

    def test_report_bytes_stable_across_runs(self, tmp_path, capsys):
        argv = ["verify", "--count", "60", "--seed", "9",
                "--output-dir", str(tmp_path)]
        assert run(argv, capsys)[0] == 0
        first = (tmp_path / "report.json").read_bytes()
        assert run(argv, capsys)[0] == 0
        assert (tmp_path / "report.json").read_bytes() == first

    def test_central_difference_mode(self, tmp_path, capsys):
        # second-derivative equations see O(h^2) truncation error, so
        # the pass bar is far looser than in exact-jet mode
        code, out, _ = run(["verify", "--count", "40", "--tol", "1e-3",
                            "--diff-mode", "central_difference",
                            "--diff-h", "1e-4",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert "[PASS]" in out

    def test_variant_from_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("variant = ns_inverse_r\nnu = 0.5\nk = 0.8\n")
        code, out, _ = run(["verify", "--count", "80",
                            "--config", str(cfg),
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        report = load_report(tmp_path)
        assert report["config"]["variant"] == "ns_inverse_r"
        names = {row["equation"] for row in report["residuals"]}
        assert "NSSwirlMomentum" in names
        assert "SwirlTransport" not in names


class TestDeriveCommand:
    def test_replay_prints_assignments(self, tmp_path, capsys):
        code, out, _ = run(["derive", "--output-dir", str(tmp_path)],
                           capsys)
        assert code == 0
        assert "q1 = (-a - 1)/a" in out
        assert "b = -2*a" in out
        assert "abar = -a" in out
        report = load_report(tmp_path)
        assignments = report["derivation"]["assignments"]
        assert assignments["p1"] == "0"

    def test_concrete_negative_half(self, tmp_path, capsys):
        code, out, _ = run(["derive", "--rational-a=-1/2",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert "swirl exponent q1 = 1" in out
        assert "vtheta = k*r*tau^-1" in out

    def test_custom_fields_report_the_family(self, tmp_path, capsys):
        code, out, _ = run(
            ["derive",
             "--field", "vr=a*r^p*tau^-1",
             "--field", "vz=b*z*r^(p-1)*tau^-1",
             "--require", "incompressibility",
             "--nonzero", "a",
             "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert "outcome: family" in out
        report = load_report(tmp_path)
        assert report["derivation"]["outcome"] == "family"

    def test_malformed_field_is_a_usage_error(self, tmp_path, capsys):
        code, _, err = run(["derive", "--field", "vr",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 2
        assert "ROLE=EXPR" in err


class TestTraceCommand:
    def test_both_methods_agree(self, tmp_path, capsys):
        code, out, _ = run(["trace", "--t-end", "0.5",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert "endpoint gap" in out
        assert "order estimates" in out
        assert (tmp_path / "trace.csv").is_file()
        assert (tmp_path / "trace.png").is_file()
        trace = (tmp_path / "trace.csv").read_text().splitlines()
        assert trace[0] == "t,r,z,r_vtheta"


class TestSimulateCommand:
    def test_snapshot_run(self, tmp_path, capsys):
        code, out, _ = run(["simulate", "--nr", "33", "--nz", "33",
                            "--t-end", "0.25",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert "stream solve reproduces the family" in out
        assert (tmp_path / "snapshot.csv").is_file()
        assert (tmp_path / "snapshot.png").is_file()
        final = load_report(tmp_path)["simulation"]["final"]
        assert final["rel_linf"] <= 0.05

    def test_unattainable_error_bound_fails(self, tmp_path, capsys):
        code, out, _ = run(["simulate", "--nr", "17", "--nz", "17",
                            "--t-end", "0.25",
                            "--max-rel-error", "1e-9",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 1
        assert "[FAIL]" in out

    def test_convergence_run(self, tmp_path, capsys):
        code, out, _ = run(["simulate", "--convergence",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert "convergence orders" in out
        assert (tmp_path / "convergence.png").is_file()
        conv = load_report(tmp_path)["simulation"]["convergence"]
        assert all(1.7 <= o <= 2.3 for o in conv["orders"])

    def test_bad_resolution_list(self, tmp_path, capsys):
        code, _, err = run(["simulate", "--convergence",
                            "--resolutions", "65",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 2
        assert "at least two" in err


class TestDiagnoseCommand:
    def test_full_pass(self, tmp_path, capsys):
        code, out, _ = run(["diagnose", "--output-dir", str(tmp_path)],
                           capsys)
        assert code == 0
        for needle in ("growth exponent", "log law", "energy ratio",
                       "inner radius"):
            assert needle in out
        for name in ("gradient_fit.png", "bkm.png", "energy.png"):
            assert (tmp_path / name).is_file()
        report = load_report(tmp_path)
        fit = report["fits"][0]
        assert abs(fit["exponent"] + 1.0) <= 0.01
        assert report["diagnostics"]["energy_ratio"] == 4.0


class TestAllCommand:
    def test_pipeline(self, tmp_path, capsys):
        code, out, _ = run(["all", "--nr", "33", "--nz", "33",
                            "--t-end", "0.25",
                            "--output-dir", str(tmp_path)], capsys)
        assert code == 0
        assert out.count("---") >= 5
        assert "[PASS] overall" in out
        report = load_report(tmp_path)
        assert {"residuals", "derivation", "trace", "simulation",
                "diagnostics"} <= set(report)
        for name in ("residuals.png", "trace.csv", "trace.png",
                     "snapshot.csv", "snapshot.png", "gradient_fit.png",
                     "bkm.png", "energy.png", "report.json"):
            assert (tmp_path / name).is_file()


class TestOutputDirResolution:
    def test_environment_variable(self, tmp_path, monkeypatch, capsys):
        target = tmp_path / "from_env"
        monkeypatch.setenv("EULERLAB_OUTPUT_DIR", str(target))
        monkeypatch.chdir(tmp_path)
        code, _, _ = run(["verify", "--count", "40"], capsys)
        assert code == 0
        assert (target / "report.json").is_file()

    def test_flag_beats_environment(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("EULERLAB_OUTPUT_DIR",
                           str(tmp_path / "ignored"))
        chosen = tmp_path / "chosen"
        code, _, _ = run(["verify", "--count", "40",
                          "--output-dir", str(chosen)], capsys)
        assert code == 0
        assert (chosen / "report.json").is_file()
        assert not (tmp_path / "ignored").exists()
