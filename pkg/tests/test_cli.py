"""Command-line surface: outputs, schemas, exit codes, determinism."""

import csv
import io
import json
import math
import shutil
import subprocess

import jsonschema
import pytest
from importlib import resources

from bellspin.cli import main


def load_schema(name):
    path = resources.files("bellspin") / "schemas" / name
    return json.loads(path.read_text(encoding="utf-8"))


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv_text(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


class TestWitnessCurve:
    def test_reference_moments_curve_minimum(self, capsys):
        code, out, _ = run_cli(capsys, "witness-curve", "--points", "1801")
        assert code == 0
        header, rows = read_csv_text(out)
        assert header == ["theta_deg", "witness"]
        values = [(float(t), float(w)) for t, w in rows]
        theta_min, w_min = min(values, key=lambda p: p[1])
        assert w_min == pytest.approx(-0.058, abs=1e-3)
        assert theta_min == pytest.approx(138.0, abs=1.0)

    def test_coherent_state_curve_nonnegative(self, capsys):
        code, out, _ = run_cli(capsys, "witness-curve", "--n", "40")
        assert code == 0
        _, rows = read_csv_text(out)
        ws = [float(w) for _, w in rows]
        assert min(ws) >= -1e-12
        at_90 = [float(w) for t, w in rows if abs(float(t) - 90.0) < 1e-9]
        assert at_90[0] == pytest.approx(0.0, abs=1e-9)

    def test_missing_config_file_exits_2(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "witness-curve", "--config", str(tmp_path / "nope.json"))
        assert code == 2
        assert "config" in err

    def test_config_file_and_fig_output(self, capsys, tmp_path):
        cfg = tmp_path / "curve.json"
        cfg.write_text(json.dumps({"contrast": 0.9, "points": 19}))
        out_csv = tmp_path / "curve.csv"
        fig = tmp_path / "curve.png"
        code, _, _ = run_cli(
            capsys, "witness-curve", "--config", str(cfg),
            "--out", str(out_csv), "--fig", str(fig))
        assert code == 0
        assert fig.stat().st_size > 0
        header, rows = read_csv_text(out_csv.read_text())
        assert header == ["theta_deg", "witness"]
        assert len(rows) == 19

    def test_malformed_set_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "witness-curve", "--set", "points")
        assert code == 2
        assert "key=value" in err


class TestEmulate:
    def run_emulate(self, capsys, outdir, *extra):
        return run_cli(capsys, "emulate", "--outdir", str(outdir),
                       "--seed", "2", "--no-figs", *extra)

    def test_summary_schema_and_files(self, capsys, tmp_path):
        outdir = tmp_path / "run"
        code, out, _ = run_cli(capsys, "emulate", "--outdir", str(outdir),
                               "--seed", "2")
        assert code == 0
        for name in ("shots_squeezing.csv", "shots_rabi.csv",
                     "shots_witness.csv", "corrected_samples.csv",
                     "summary.json", "rabi_fit.png", "witness_curve.png"):
            assert (outdir / name).exists(), name
        summary = json.loads((outdir / "summary.json").read_text())
        jsonschema.validate(summary, load_schema("emulate_summary.json"))
        assert json.loads(out) == summary
        assert summary["witness"]["value"] < 0
        assert summary["witness"]["significance"] > 0
        header, rows = read_csv_text((outdir / "shots_witness.csv").read_text())
        assert header == ["seed", "tau_ms", "n1_det", "n2_det"]
        assert len(rows) == 10

    def test_determinism_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self.run_emulate(capsys, a)[0] == 0
        assert self.run_emulate(capsys, b)[0] == 0
        for name in ("summary.json", "shots_squeezing.csv", "shots_rabi.csv",
                     "shots_witness.csv", "corrected_samples.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_no_figs_skips_rendering(self, capsys, tmp_path):
        outdir = tmp_path / "quiet"
        assert self.run_emulate(capsys, outdir)[0] == 0
        assert not (outdir / "rabi_fit.png").exists()
        assert not (outdir / "witness_curve.png").exists()

    def test_zero_noise_recovers_target_zeta(self, capsys, tmp_path):
        code, out, _ = self.run_emulate(
            capsys, tmp_path / "clean",
            "--set", "noise.n_sigma=0", "--set", "noise.det_sigma_1=0",
            "--set", "noise.det_sigma_2=0", "--set", "noise.nu_1=0",
            "--set", "noise.nu_2=0", "--set", "noise.clock_slope=0")
        assert code == 0
        zeta = json.loads(out)["squeezing"]["zeta_sq"]
        assert abs(zeta["mean"] - 0.272) <= 3 * zeta["std_error"]

    def test_empty_postselection_exits_3(self, capsys, tmp_path):
        code, _, err = self.run_emulate(
            capsys, tmp_path / "x",
            "--set", "noise.postselect_lo=1000",
            "--set", "noise.postselect_hi=1001")
        assert code == 3
        assert err.startswith("error:")

    def test_unknown_config_key_exits_2(self, capsys, tmp_path):
        code, _, _ = self.run_emulate(
            capsys, tmp_path / "x", "--set", "bogus=1")
        assert code == 2

    def test_unknown_noise_key_exits_2(self, capsys, tmp_path):
        code, _, _ = self.run_emulate(
            capsys, tmp_path / "x", "--set", "noise.typo=1")
        assert code == 2


class TestFitRabi:
    TRUE = (0.980, -0.030, 2.464, -0.016)

    def write_data(self, path, corrupt=False, drop_column=False):
        c, t0, g, d = self.TRUE
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["tau_ms", "value"] if drop_column
                            else ["tau_ms", "ratio"])
            for i in range(25):
                tau = 0.05 + 0.1 * i
                r = c * math.sin(t0 + g * tau + d * tau * tau)
                writer.writerow([tau, "nan" if corrupt else r])

    def test_fit_matches_generator(self, capsys, tmp_path):
        data = tmp_path / "sweep.csv"
        self.write_data(data)
        code, out, _ = run_cli(capsys, "fit-rabi", "--data", str(data))
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, load_schema("fit_rabi.json"))
        assert doc["contrast"] == pytest.approx(self.TRUE[0], abs=1e-7)
        assert doc["gamma"] == pytest.approx(self.TRUE[2], abs=1e-6)
        assert doc["n_points"] == 25

    def test_nan_data_exits_4(self, capsys, tmp_path):
        data = tmp_path / "bad.csv"
        self.write_data(data, corrupt=True)
        code, _, err = run_cli(capsys, "fit-rabi", "--data", str(data))
        assert code == 4
        assert err.startswith("error:")

    def test_missing_column_exits_2(self, capsys, tmp_path):
        data = tmp_path / "cols.csv"
        self.write_data(data, drop_column=True)
        code, _, _ = run_cli(capsys, "fit-rabi", "--data", str(data))
        assert code == 2


class TestLhvCheck:
    def test_large_ensemble_min_is_zero(self, capsys):
        code, out, _ = run_cli(capsys, "lhv-check", "--n", "476")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, load_schema("lhv_check.json"))
        assert doc["min"] == 0
        counts = doc["strategy"]
        assert sum(counts.values()) == 476

    def test_brute_force_agrees(self, capsys):
        code, out, _ = run_cli(capsys, "lhv-check", "--n", "6", "--brute-force")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, load_schema("lhv_check.json"))
        assert doc["brute_force_min"] == doc["min"] == 0


class TestAdversary:
    def test_reference_point(self, capsys):
        code, out, _ = run_cli(
            capsys, "adversary", "--n", "476", "--theta", "128", "--m", "200")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, load_schema("adversary.json"))
        assert doc["q_star"] == pytest.approx(7.381e-4, abs=2e-6)
        assert doc["p_star"] == pytest.approx(0.8627, abs=5e-4)
        assert doc["theta_deg"] == 128.0


class TestOverlap:
    def test_bell_region_default_moments(self, capsys):
        code, out, _ = run_cli(capsys, "overlap", "--region", "bell")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, load_schema("overlap.json"))
        assert doc["probability"] == pytest.approx(0.9989, abs=0.0005)

    def test_producibility_region(self, capsys):
        code, out, _ = run_cli(capsys, "overlap", "--region", "k_producible(24)")
        assert code == 0
        assert json.loads(out)["probability"] == pytest.approx(0.010, abs=0.005)

    def test_bad_region_exits_2(self, capsys):
        code, _, err = run_cli(capsys, "overlap", "--region", "bogus")
        assert code == 2
        assert "region" in err


class TestProducibility:
    def test_curve_csv(self, capsys, tmp_path):
        fig = tmp_path / "bound.png"
        code, out, _ = run_cli(capsys, "producibility", "--k", "4",
                               "--points", "12", "--fig", str(fig))
        assert code == 0
        header, rows = read_csv_text(out)
        assert header == ["contrast", "zeta_sq_limit"]
        assert len(rows) == 12
        assert all(0.0 <= float(z) <= 1.0 for _, z in rows)
        assert fig.stat().st_size > 0

    def test_k1_curve_is_flat_one(self, capsys):
        code, out, _ = run_cli(capsys, "producibility", "--k", "1",
                               "--points", "5")
        assert code == 0
        _, rows = read_csv_text(out)
        assert all(float(z) == pytest.approx(1.0) for _, z in rows)


class TestHusimi:
    def test_coherent_field_csv(self, capsys):
        code, out, _ = run_cli(capsys, "husimi", "--n", "20",
                               "--theta-points", "13", "--phi-points", "25")
        assert code == 0
        header, rows = read_csv_text(out)
        assert header == ["theta_deg", "phi_deg", "q"]
        assert len(rows) == 13 * 25
        best = max(rows, key=lambda r: float(r[2]))
        assert float(best[0]) == pytest.approx(90.0, abs=8.0)
        assert float(best[1]) == pytest.approx(0.0, abs=8.0)


class TestInstalledScript:
    def test_console_entry_point(self):
        exe = shutil.which("bellspin")
        assert exe, "console script not installed"
        proc = subprocess.run([exe, "lhv-check", "--n", "5"],
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["min"] == 0
