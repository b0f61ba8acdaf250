import csv
import subprocess
import sys

import numpy as np
import pytest

from jointpricing import cli
from jointpricing.pricing_core import competitiveness_region, reference_pair, RiskSpec

REF = ["--preset", "reference"]


def run(tmp_path, *argv, out="out"):
    return cli.main([argv[0], "--out", str(tmp_path / out), *argv[1:]])


def read_kv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["key", "value"]
    return dict(rows[1:])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def tree(path):
    return {p.relative_to(path): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


class TestRegion:
    def test_reference_curve(self, tmp_path, capsys):
        assert run(tmp_path, "region", *REF, "--gamma", "2") == 0
        rows = read_rows(tmp_path / "out/region_curve.csv")
        assert len(rows) == 1001
        assert list(rows[0]) == ["n", "psi_joint", "psi_a_ref", "psi_b_ref"]
        psi = np.array([float(r["psi_joint"]) for r in rows])
        assert float(rows[psi.argmin()]["n"]) == pytest.approx(0.972, abs=1e-3)
        summary = read_kv(tmp_path / "out/region_summary.csv")
        assert summary["exists"] == "true"
        assert float(summary["n_min"]) == pytest.approx(0.97197207, abs=1e-8)
        assert (tmp_path / "out/region.png").stat().st_size > 0
        assert "n_min" in capsys.readouterr().out

    def test_full_precision(self, tmp_path):
        run(tmp_path, "region", *REF, "--no-plots")
        summary = read_kv(tmp_path / "out/region_summary.csv")
        expected = competitiveness_region(reference_pair(), RiskSpec(0.5, 1.686)).psi_min
        assert float(summary["psi_min"]) == expected

    def test_no_region_still_writes_curve(self, tmp_path):
        args = ["--pi-a", "1", "--sigma-a", "0.1", "--pi-b", "1", "--sigma-b", "0.3", "--rho", "0.5"]
        assert run(tmp_path, "region", *args, "--grid", "11") == 0
        assert read_kv(tmp_path / "out/region_summary.csv")["exists"] == "false"
        assert len(read_rows(tmp_path / "out/region_curve.csv")) == 11

    def test_monitoring_interval(self, tmp_path):
        assert run(tmp_path, "region", *REF, "--psi-star", "0.006") == 0
        summary = read_kv(tmp_path / "out/region_summary.csv")
        assert 0 < float(summary["n_lower"]) < float(summary["n_min"]) < float(summary["n_upper"]) < 1

    def test_psi_star_below_minimum(self, tmp_path, capsys):
        assert run(tmp_path, "region", *REF, "--psi-star", "0.001") == 1
        assert "below the minimum joint loading" in capsys.readouterr().err
        assert not (tmp_path / "out/region_curve.csv").exists()

    def test_single_point_grid(self, tmp_path):
        assert run(tmp_path, "region", *REF, "--grid", "1", "--no-plots") == 0
        assert len(read_rows(tmp_path / "out/region_curve.csv")) == 1

    def test_stats_file_and_overrides(self, tmp_path):
        stats = tmp_path / "stats.txt"
        stats.write_text("pi_a = 1\nsigma_a = 0.1\npi_b = 1\nsigma_b = 0.2\nrho = -0.5\n")
        assert run(tmp_path, "region", "--stats", str(stats), "--rho", "0.9", "--no-plots") == 0
        summary = read_kv(tmp_path / "out/region_summary.csv")
        assert float(summary["b_rho"]) == pytest.approx(1.8)

    def test_csv_stdout(self, tmp_path, capsys):
        run(tmp_path, "region", *REF, "--format", "csv", "--no-plots")
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "key,value" and any(line.startswith("n_ct,") for line in out)


class TestValidation:
    @pytest.mark.parametrize(
        "argv",
        [
            ["region"],
            ["region", "--preset", "reference", "--zeta", "1.5"],
            ["region", "--preset", "reference", "--grid", "0"],
            ["region", "--stats", "missing.txt"],
            ["region", "--pi-a", "x"],
            ["frobnicate"],
            ["decide", "--preset", "reference"],
            ["decide", "--preset", "reference", "--wd", "1.0"],
            ["decide", "--preset", "reference", "--wd", "0.5", "--insurers-a", "1"],
            ["simulate"],
            ["screen"],
            ["sweep", "--preset", "reference", "--scenario", "1"],
        ],
    )
    def test_exit_one(self, tmp_path, argv):
        assert run(tmp_path, *argv) == 1

    def test_computation_failure_exits_two(self, tmp_path):
        bad = tmp_path / "flat.csv"
        rows = ["period,line_id,line_name,loss"]
        for k in range(10):
            rows += [f"{2000 + k},a,A,{1 + k}", f"{2000 + k},b,B,{1 + k % 3}"]
        bad.write_text("\n".join(rows) + "\n")
        assert run(tmp_path, "screen", "--input", str(bad)) == 2

    def test_no_convergence_reported(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setattr(cli.mm, "solve_equilibrium", _failing_solver)
        assert run(tmp_path, "decide", *REF, "--wd", "0.3") == 2
        assert "did not converge" in capsys.readouterr().err


def _failing_solver(*args, **kwargs):
    raise cli.NoConvergence("stalled", residual=0.25)


class TestConfig:
    def test_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# reference pair\npreset = reference\ngamma = 2\ngrid = 5\nplots = false\n")
        assert run(tmp_path, "region", "--config", str(cfg), "--grid", "7") == 0
        rows = read_rows(tmp_path / "out/region_curve.csv")
        assert len(rows) == 7
        assert not (tmp_path / "out/region.png").exists()
        ref = competitiveness_region(reference_pair(), RiskSpec(0.5, 2.0))
        assert float(rows[0]["psi_a_ref"]) == ref.psi_a

    def test_append_setting(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("scenario = 0.5,0.5; 3,3\n")
        assert run(tmp_path, "sweep", "--config", str(cfg), *REF, "--grid", "3", "--no-plots") == 0
        assert set(read_kv(tmp_path / "out/sweep_summary.csv")) == {"signs_0.5_0.5", "signs_3_3", "w_ct_0.5_0.5", "w_ct_3_3"}

    @pytest.mark.parametrize("text", ["bogus = 1\n", "plots = maybe\n", "no separator\n"])
    def test_bad_config(self, tmp_path, text):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(text)
        assert run(tmp_path, "region", "--config", str(cfg), *REF) == 1

    def test_missing_config(self, tmp_path):
        assert run(tmp_path, "region", "--config", str(tmp_path / "nope"), *REF) == 1


class TestDecide:
    MARKET = [*REF, "--benefit-ratio", "10", "--wd", "0.3", "--no-plots"]

    def verdicts(self, tmp_path, qa, qb):
        assert run(tmp_path, "decide", *self.MARKET, "--q-a", str(qa), "--q-b", str(qb)) == 0
        return read_kv(tmp_path / "out/decision_summary.csv")

    def test_low_reactions(self, tmp_path):
        s = self.verdicts(tmp_path, 0.5, 0.5)
        assert s["verdict_demand_threshold"] == s["verdict_reaction_bands"] == "SeparateFavored"
        assert "advisory" not in s

    def test_high_reactions(self, tmp_path):
        s = self.verdicts(tmp_path, 3, 3)
        assert s["verdict_demand_threshold"] == s["verdict_reaction_bands"] == "JointFavored"

    def test_between_bands(self, tmp_path):
        s = self.verdicts(tmp_path, 1.5, 1.5)
        assert s["verdict_reaction_bands"] == "Indeterminate"
        assert s["advisory"] == ("joint" if float(s["d_ptf"]) > 0 else "separate")
        rows = read_rows(tmp_path / "out/decision.csv")
        assert [r["rule"] for r in rows] == ["demand-threshold", "reaction-bands"]

    def test_logistic_model(self, tmp_path):
        assert run(tmp_path, "decide", *self.MARKET, "--q-a", "3", "--q-b", "3", "--demand-model", "logistic") == 0
        assert read_kv(tmp_path / "out/decision_summary.csv")["demand_model"] == "logistic"

    def test_explicit_demands(self, tmp_path):
        assert run(tmp_path, "decide", *REF, "--demand-a", "700000", "--demand-b", "300000", "--no-plots") == 0
        assert float(read_kv(tmp_path / "out/decision_summary.csv")["w_d"]) == pytest.approx(0.3)


class TestSweep:
    def test_presets(self, tmp_path):
        assert run(tmp_path, "sweep", *REF, "--benefit-ratio", "10") == 0
        s = read_kv(tmp_path / "out/sweep_summary.csv")
        assert set(s["signs_0.5_0.5"]) == {"-"}
        assert set(s["signs_3_3"]) == {"+"}
        assert set(s["signs_0.5_3"]) == {"+"}
        flip = s["signs_3_0.5"]
        assert flip[0] == "+" and flip[-1] == "-" and "+-" in flip and "-+" not in flip
        w_ct = float(s["w_ct_3_0.5"])
        rows = [r for r in read_rows(tmp_path / "out/sweep.csv") if (r["q_a"], r["q_b"]) == ("3", "0.5")]
        # separate pricing wins above w_ct; the flip itself sits a little
        # below it, where neither rule is decisive
        flip_at = min(float(r["w_d"]) for r in rows if float(r["rel_d_ptf"]) < 0)
        assert w_ct - 0.1 < flip_at <= w_ct
        assert all(float(r["rel_d_ptf"]) < 0 for r in rows if float(r["w_d"]) > w_ct)
        assert (tmp_path / "out/sweep.png").exists()

    def test_single_point(self, tmp_path):
        assert run(tmp_path, "sweep", *REF, "--grid", "1", "--scenario", "3,3", "--no-plots") == 0
        assert len(read_rows(tmp_path / "out/sweep.csv")) == 1


class TestSimulate:
    def test_common_fixture(self, tmp_path):
        argv = ["simulate", "--fixture", "common", "--seed", "42", "--n-sims", "5000", "--dump-scenarios"]
        assert run(tmp_path, *argv) == 0
        s = read_kv(tmp_path / "out/simulation_summary.csv")
        assert float(s["rho"]) < 0
        assert s["sample_count"] == "5000" and s["seed"] == "42"
        assert len(read_rows(tmp_path / "out/scenarios.csv")) == 10_000
        assert float(read_kv(tmp_path / "out/region_summary.csv")["psi_a"]) > 0

    def test_deterministic(self, tmp_path):
        argv = ["simulate", "--fixture", "common", "--seed", "42", "--n-sims", "2000", "--calibrate-var", "0.95"]
        assert run(tmp_path, *argv, out="one") == 0
        assert run(tmp_path, *argv, out="two") == 0
        assert tree(tmp_path / "one") == tree(tmp_path / "two")

    def test_gaussian_calibration(self, tmp_path):
        argv = ["simulate", "--fixture", "lowvol", "--seed", "1", "--n-sims", "100000", "--calibrate-var", "0.95"]
        assert run(tmp_path, *argv) == 0
        s = read_kv(tmp_path / "out/simulation_summary.csv")
        assert float(s["gamma_calibrated"]) == pytest.approx(1.6449, rel=0.02)
        rows = read_rows(tmp_path / "out/var_curve.csv")
        assert list(rows[0]) == ["n", "psi_var", "psi_msd"] and len(rows) == 21

    def test_data_files(self, tmp_path, bundled):
        argv = [
            "simulate", "--data-a", str(bundled("mortality_common_a.csv")),
            "--data-b", str(bundled("mortality_common_b.csv")), "--n-sims", "500", "--no-plots",
        ]
        assert run(tmp_path, *argv) == 0

    def test_ages_outside_data(self, tmp_path):
        assert run(tmp_path, "simulate", "--fixture", "common", "--age-a", "85", "--n-sims", "10") == 1


class TestScreen:
    def test_three_lines(self, tmp_path, capsys):
        assert run(tmp_path, "screen", "--fixture", "losses3", "--pair", "L01,L02") == 0
        text = (tmp_path / "out/screen_report.txt").read_text()
        assert capsys.readouterr().out == text
        assert text.count("•") == 3
        assert (tmp_path / "out/screen_report.csv").exists()
        # named with the less risky line first
        (curve,) = (tmp_path / "out").glob("region_L0[12]_L0[12].csv")
        rows = read_rows(curve)
        assert len(rows) == 101 and list(rows[0]) == ["n", "loaded_premium", "level_a", "level_b"]
        for name in ("losses.png", "psi.png", curve.with_suffix(".png").name):
            assert (tmp_path / "out" / name).stat().st_size > 0

    def test_ten_lines_csv(self, tmp_path):
        assert run(tmp_path, "screen", "--fixture", "losses10", "--format", "csv", "--no-plots") == 0
        text = (tmp_path / "out/screen_report.csv").read_text()
        matrix = text.split("# matrix\n")[1].split("# summary")[0].strip().splitlines()
        assert len(matrix) == 11 and all(len(r.split(",")) == 11 for r in matrix)
        assert text.strip().splitlines()[-1].startswith("45,")

    def test_malformed_row_named(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("period,line_id,line_name,loss\n2001,a,A,1\n2001,b,B,oops\n")
        assert run(tmp_path, "screen", "--input", str(bad)) == 1
        assert "line 3" in capsys.readouterr().err

    def test_byte_identical(self, tmp_path):
        argv = ["screen", "--fixture", "losses10", "--pair", "L01,L02"]
        assert run(tmp_path, *argv, out="one") == 0
        assert run(tmp_path, *argv, out="two") == 0
        assert tree(tmp_path / "one") == tree(tmp_path / "two")


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "jointpricing", "region", *REF, "--out", str(tmp_path), "--no-plots"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "psi_min" in proc.stdout
