"""End-to-end command-line checks: artifacts, exit codes, reproducibility."""

import json
import math

import pytest

import ramzisim.cli as cli
from ramzisim.errors import CalibrationError

# Small search grids keep each in-process run around a second while
# preserving the tuned solution's structure (symmetric bias, four
# levels); link parameters stay at their defaults so required powers
# match the full-size values.
SMALL_TUNER = """
tuner:
  detuning_step_pm: 16.0
  phi_ps_steps: 90
  voltage_points: 81
"""


def write_config(tmp_path, body: str):
    path = tmp_path / "config.yaml"
    path.write_text(body)
    return str(path)


def run(argv):
    return cli.main(argv)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


# ---------------------------------------------------------------------------
# happy paths


def test_levels_writes_artifacts_and_exits_zero(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TUNER)
    out = tmp_path / "out"
    assert run(["levels", "--config", cfg, "--output-dir", str(out)]) == 0
    header, rows = read_csv(out / "drive_levels.csv")
    assert header == ["level_index", "v_top_volt", "v_bottom_volt",
                      "field_level_unit_input"]
    assert len(rows) == 4
    levels = [float(r[3]) for r in rows]
    assert levels == sorted(levels)
    doc = json.loads((out / "bias_solution.json").read_text())
    assert {"heater_top_mw", "heater_bottom_mw", "phi_ps",
            "field_levels"} <= set(doc)
    assert "oma_e" in capsys.readouterr().out


def test_tune_writes_surface_with_header(tmp_path):
    cfg = write_config(tmp_path, SMALL_TUNER)
    out = tmp_path / "out"
    assert run(["tune", "--config", cfg, "--output-dir", str(out)]) == 0
    header, rows = read_csv(out / "tuner_surface.csv")
    assert header == ["detuning_pm", "phi_ps_deg", "oma_e_unit_input",
                      "offset_unit_input", "feasible"]
    assert len(rows) == 12 * 90  # detuning grid times phase grid
    assert {row[4] for row in rows} <= {"true", "false"}


def test_eye_metrics_artifact(tmp_path):
    cfg = write_config(tmp_path, SMALL_TUNER)
    out = tmp_path / "out"
    assert run(["eye", "--config", cfg, "--output-dir", str(out)]) == 0
    metrics = json.loads((out / "eye_metrics.json").read_text())
    assert len(metrics["sampled_levels"]) == 4
    assert len(metrics["inner_eye_openings"]) == 3
    assert all(v > 0.0 for v in metrics["inner_eye_openings"])
    header, rows = read_csv(out / "eye_amplitude.csv")
    assert header == ["trace_index", "symbol", "time_ui",
                      "field_level_unit_input"]
    assert len(rows) > 1000
    header, _ = read_csv(out / "eye_phase.csv")
    assert header[-1] == "phase_rad"


def test_constellation_has_sixteen_points(tmp_path):
    cfg = write_config(tmp_path, SMALL_TUNER)
    out = tmp_path / "out"
    assert run(["constellation", "--config", cfg,
                "--output-dir", str(out)]) == 0
    header, rows = read_csv(out / "constellation.csv")
    assert len(rows) == 16
    summary = json.loads((out / "constellation_summary.json").read_text())
    assert summary["n_points"] == 16
    assert 0.2 < summary["offset"]["magnitude"] < 0.5


def test_thermal_sweep_artifacts(tmp_path):
    cfg = write_config(tmp_path, """
thermal:
  n_steps: 64
  settle_taus: 10.0
""")
    out = tmp_path / "out"
    assert run(["thermal-sweep", "--config", cfg,
                "--output-dir", str(out)]) == 0
    header, rows = read_csv(out / "thermal_sweep.csv")
    assert header == ["direction", "heater_mw", "transmission_v0",
                      "transmission_v4"]
    assert {row[0] for row in rows} == {"up", "down"}
    assert len(rows) == 2 * 64
    report = json.loads((out / "thermal_report.json").read_text())
    assert {"bistable", "metastable", "unstable",
            "input_power_dbm"} <= set(report)


def test_ber_sweep_emits_monotone_csv(tmp_path, capsys):
    cfg = write_config(tmp_path, "link:\n  power_points: 18\n")
    out = tmp_path / "out"
    assert run(["ber-sweep", "--config", cfg, "--output-dir", str(out),
                "--format", "ROQ16", "--datarate", "200"]) == 0
    header, rows = read_csv(out / "ber_sweep.csv")
    assert header == ["laser_power_dbm", "ber"]
    powers = [float(r[0]) for r in rows]
    bers = [float(r[1]) for r in rows]
    assert powers == sorted(powers) and len(set(powers)) == len(powers)
    assert all(b2 <= b1 + 1e-15 for b1, b2 in zip(bers, bers[1:]))
    summary = json.loads((out / "ber_summary.json").read_text())
    assert math.isclose(summary["required_power_dbm"], 6.710, abs_tol=1e-3)
    assert summary["phase_noise"] == {"enabled": False}
    assert "6.710" in capsys.readouterr().out


def test_ber_sweep_phase_noise_flag(tmp_path):
    cfg = write_config(tmp_path, "link:\n  power_points: 12\n")
    out = tmp_path / "out"
    assert run(["ber-sweep", "--config", cfg, "--output-dir", str(out),
                "--format", "ROQ16", "--datarate", "200",
                "--phase-noise"]) == 0
    summary = json.loads((out / "ber_summary.json").read_text())
    assert summary["phase_noise"]["enabled"] is True
    assert math.isclose(summary["phase_noise"]["sigma_rad"],
                        0.017540526, abs_tol=1e-6)
    assert math.isclose(summary["required_power_dbm"], 7.747105,
                        abs_tol=1e-3)


def test_linewidth_flag_implies_phase_noise(tmp_path):
    cfg = write_config(tmp_path, "link:\n  power_points: 12\n")
    out = tmp_path / "out"
    assert run(["ber-sweep", "--config", cfg, "--output-dir", str(out),
                "--format", "MZI-QAM16", "--linewidth-mhz", "2.0"]) == 0
    summary = json.loads((out / "ber_summary.json").read_text())
    assert summary["phase_noise"]["enabled"] is True
    assert summary["phase_noise"]["linewidth_mhz"] == 2.0
    assert summary["phase_noise"]["path_mismatch_cm"] == 1.0


def test_target_ber_flag(tmp_path):
    cfg = write_config(tmp_path, "link:\n  power_points: 12\n")
    out = tmp_path / "out"
    assert run(["ber-sweep", "--config", cfg, "--output-dir", str(out),
                "--format", "ROQ16", "--target-ber", "1e-4"]) == 0
    summary = json.loads((out / "ber_summary.json").read_text())
    assert summary["target_ber"] == 1e-4
    assert summary["required_power_dbm"] < 6.71


def test_unreachable_target_reports_null_required(tmp_path):
    cfg = write_config(tmp_path,
                       "link:\n  power_points: 12\n"
                       "  afe_noise_a_rthz: 1.5e-5\n")
    out = tmp_path / "out"
    assert run(["ber-sweep", "--config", cfg, "--output-dir",
                str(out)]) == 0
    summary = json.loads((out / "ber_summary.json").read_text())
    assert summary["required_power_dbm"] is None


def test_compare_covers_all_formats(tmp_path):
    cfg = write_config(tmp_path, "link:\n  power_points: 18\n")
    out = tmp_path / "out"
    assert run(["compare", "--config", cfg, "--output-dir", str(out),
                "--datarate", "200"]) == 0
    header, rows = read_csv(out / "format_comparison.csv")
    assert header[0] == "laser_power_dbm"
    assert "ber_ROQ16" in header and "ber_MZI-QAM4" in header
    assert len(header) == 7 and len(rows) == 18
    summary = json.loads((out / "comparison_summary.json").read_text())
    assert len(summary["required_power_dbm"]) == 6
    assert math.isclose(summary["required_power_dbm"]["ROQ16"], 6.710,
                        abs_tol=1e-3)
    assert "MRM-PAM4 vs ROQ16" in summary["gaps_db"]


def test_packaged_default_config_runs(tmp_path):
    out = tmp_path / "out"
    assert run(["compare", "--config", "default",
                "--output-dir", str(out)]) == 0
    assert (out / "comparison_summary.json").exists()


# ---------------------------------------------------------------------------
# reproducibility


def test_same_config_and_seed_byte_identical(tmp_path):
    cfg = write_config(tmp_path,
                       "link:\n  power_points: 12\n  target_ber: 1.0e-2\n")
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run(["ber-sweep", "--config", cfg, "--output-dir", str(out),
                    "--mc-symbols", "50000"]) == 0
        outs.append(out)
    for artifact in ("ber_sweep.csv", "ber_summary.json"):
        assert ((outs[0] / artifact).read_bytes()
                == (outs[1] / artifact).read_bytes())


def test_seed_override_changes_monte_carlo(tmp_path):
    cfg = write_config(tmp_path,
                       "link:\n  power_points: 12\n  target_ber: 1.0e-2\n")
    mc = []
    for seed in ("1", "2"):
        out = tmp_path / f"seed{seed}"
        assert run(["ber-sweep", "--config", cfg, "--output-dir", str(out),
                    "--mc-symbols", "50000", "--seed", seed]) == 0
        summary = json.loads((out / "ber_summary.json").read_text())
        mc.append([point["mc_ber"] for point in summary["monte_carlo"]])
    assert mc[0] != mc[1]


# ---------------------------------------------------------------------------
# failure paths


def test_malformed_config_negative_q(tmp_path, capsys):
    cfg = write_config(tmp_path, "device:\n  target_q: -3500.0\n")
    out = tmp_path / "out"
    rc = run(["tune", "--config", cfg, "--output-dir", str(out)])
    assert rc == 1
    assert "device.target_q" in capsys.readouterr().err
    report = json.loads((out / "error.json").read_text())
    assert report["exit_code"] == 1
    assert report["error_type"] == "ConfigError"
    assert "device.target_q" in report["message"]


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, "link:\n  bogus_key: 1.0\n")
    assert run(["compare", "--config", cfg,
                "--output-dir", str(tmp_path / "out")]) == 1
    assert "link.bogus_key" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    rc = run(["levels", "--config", str(tmp_path / "nope.yaml"),
              "--output-dir", str(tmp_path / "out")])
    assert rc == 1
    assert "not found" in capsys.readouterr().err


def test_phase_noise_rejected_for_imdd(tmp_path, capsys):
    cfg = write_config(tmp_path, "link:\n  power_points: 12\n")
    rc = run(["ber-sweep", "--config", cfg, "--output-dir",
              str(tmp_path / "out"), "--format", "MRM-PAM4",
              "--phase-noise"])
    assert rc == 1
    assert "IM-DD" in capsys.readouterr().err


def test_numerical_failure_maps_to_exit_two(tmp_path, monkeypatch, capsys):
    def boom(cfg):
        raise CalibrationError("ring cannot meet the requested targets")

    monkeypatch.setattr(cli, "_tune", boom)
    out = tmp_path / "out"
    rc = run(["levels", "--output-dir", str(out)])
    assert rc == 2
    report = json.loads((out / "error.json").read_text())
    assert report["error_type"] == "CalibrationError"
    assert report["exit_code"] == 2
    assert "cannot meet" in capsys.readouterr().err


def test_success_removes_stale_error_report(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("device:\n  target_q: -1.0\n")
    good = tmp_path / "good.yaml"
    good.write_text(SMALL_TUNER)
    out = tmp_path / "out"
    assert run(["levels", "--config", str(bad),
                "--output-dir", str(out)]) == 1
    assert (out / "error.json").exists()
    assert run(["levels", "--config", str(good),
                "--output-dir", str(out)]) == 0
    assert not (out / "error.json").exists()


def test_usage_errors_exit_one(capsys):
    assert run(["bogus-command"]) == 1
    assert run([]) == 1
    assert run(["ber-sweep", "--bogus-flag"]) == 1
    assert run(["ber-sweep", "--format", "QAM-1024"]) == 1
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "reproduce-paper" in capsys.readouterr().out


def test_negative_seed_rejected(tmp_path, capsys):
    rc = run(["levels", "--seed", "-3",
              "--output-dir", str(tmp_path / "out")])
    assert rc == 1
    assert "seed" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# full pipeline


def test_reproduce_paper_reports_known_mismatches(tmp_path, capsys):
    cfg = write_config(tmp_path, SMALL_TUNER + """
thermal:
  onset_iterations: 3
link:
  power_points: 18
""")
    out = tmp_path / "out"
    rc = run(["reproduce-paper", "--config", cfg,
              "--output-dir", str(out)])
    assert rc == 3
    summary = json.loads((out / "acceptance_summary.json").read_text())
    assert summary["n_checks"] == 21
    assert set(summary["failed"]) == {
        "required-power-roq16-400g",
        "imdd-penalty-200g",
        "imdd-penalty-400g",
        "laser-energy-400g",
    }
    captured = capsys.readouterr().out
    assert "[PASS] calibration-anchor" in captured
    assert "[FAIL] required-power-roq16-400g" in captured
    report = json.loads((out / "error.json").read_text())
    assert report["exit_code"] == 3
    assert (out / "comparison_200g.csv").exists()
    assert (out / "thermal_report.json").exists()
