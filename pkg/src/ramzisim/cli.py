"""Command-line front end: reproducible runs driven by one config file.

Exit codes: 0 success, 1 configuration or validation problem, 2
numerical failure inside a model, 3 headline-number mismatch (only from
``reproduce-paper``).  Every failure also leaves a machine-readable
``error.json`` in the output directory.  CSV floats are written with
``%.12g`` so identical configs and seeds produce byte-identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuit import Constellation, build_constellation
from .config import ExperimentConfig, load_config
from .errors import ConfigError, RamziSimError, UnreachableTargetError
from .link import (LINK_FORMATS, PhaseNoise, ber, ber_with_phase_noise,
                   calibrate_noise_bandwidth, compare_formats,
                   laser_energy_fj_per_bit, required_power,
                   simulate_ber_monte_carlo)
from .thermal import instability_onset, is_unstable, sweep_and_diagnose
from .transient import generate_prbs_drive, simulate_eye
from .tuning import detuning_phase_surface, tune_static

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_ACCEPTANCE = 3

_FLOAT_FMT = "%.12g"


class _UsageError(Exception):
    """Raised instead of argparse's sys.exit so main() can map to 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# serialization helpers


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % float(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> Path:
    """Write rows with a mandatory header naming columns and units."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _json_ready(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _json_ready(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        out = {}
        for key, value in obj.items():
            if isinstance(key, tuple):
                key = " vs ".join(str(k) for k in key)
            out[str(key)] = _json_ready(value)
        return out
    if isinstance(obj, np.ndarray):
        return [_json_ready(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_json_ready(obj), indent=2, sort_keys=True)
                    + "\n")
    return path


def _say_wrote(path: Path) -> None:
    print(f"wrote {path}")


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _tune(cfg: ExperimentConfig):
    mrm = cfg.mrm()
    template = cfg.ramzi_template(mrm)
    spec = cfg.sweep_spec()
    solution = tune_static(template, spec)
    return mrm, template, spec, solution


def _write_bias_solution(out: Path, solution) -> Path:
    doc = _json_ready(solution)
    doc["field_levels"] = [float(v) for v in solution.drive_table.levels]
    return write_json(out / "bias_solution.json", doc)


def _write_drive_levels(out: Path, solution) -> Path:
    rows = [(k, e.v_top, e.v_bottom, e.field_level)
            for k, e in enumerate(solution.drive_table.entries)]
    return write_csv(out / "drive_levels.csv",
                     ["level_index", "v_top_volt", "v_bottom_volt",
                      "field_level_unit_input"], rows)


def _make_waves(cfg: ExperimentConfig, solution):
    t = cfg.transient
    wave_i = generate_prbs_drive(
        t.prbs_order, t.baud_rate_gbd, solution.drive_table,
        t.rise_fall_fraction, eo_bandwidth_ghz=t.eo_bandwidth_ghz)
    wave_q = generate_prbs_drive(
        t.prbs_order, t.baud_rate_gbd, solution.drive_table,
        t.rise_fall_fraction, eo_bandwidth_ghz=t.eo_bandwidth_ghz,
        symbol_offset=t.q_symbol_offset)
    return wave_i, wave_q


def _write_eye(out: Path, eye, name: str, value_column: str) -> Path:
    rows = []
    for trace_index in range(eye.traces.shape[0]):
        symbol = int(eye.symbols[trace_index])
        trace = eye.traces[trace_index]
        for time_ui, value in zip(eye.time_ui, trace):
            rows.append((trace_index, symbol, time_ui, value))
    return write_csv(out / name,
                     ["trace_index", "symbol", "time_ui", value_column],
                     rows)


def _thermal_kwargs(cfg: ExperimentConfig) -> dict:
    th = cfg.thermal
    return dict(p_min_mw=th.heater_min_mw, p_max_mw=th.heater_max_mw,
                drive_rate_hz=th.drive_rate_hz, n_steps=th.n_steps,
                settle_taus=th.settle_taus,
                laser_wavelength_nm=cfg.ramzi.laser_wavelength_nm)


def _write_thermal(out: Path, up, down, report, extra: dict) -> None:
    rows = []
    for trace in (up, down):
        for h, t0, t4 in zip(trace.heater_powers_mw, trace.transmission_v0,
                             trace.transmission_v4):
            rows.append((trace.direction, h, t0, t4))
    _say_wrote(write_csv(
        out / "thermal_sweep.csv",
        ["direction", "heater_mw", "transmission_v0", "transmission_v4"],
        rows))
    doc = _json_ready(report)
    doc["unstable"] = is_unstable(report)
    doc.update(extra)
    _say_wrote(write_json(out / "thermal_report.json", doc))


def _effective_link(cfg: ExperimentConfig, args):
    fmt = args.format if getattr(args, "format", None) else cfg.link.format
    rate = (args.datarate if getattr(args, "datarate", None) is not None
            else cfg.link.datarate_gbps)
    link_cfg = cfg.link_config(fmt, rate)
    target = (args.target_ber if getattr(args, "target_ber", None) is not None
              else cfg.link.target_ber)
    if not 0.0 < target < 0.1:
        raise ConfigError(f"target BER must lie in (0, 0.1), got {target}")
    pn = None
    wants_pn = (getattr(args, "phase_noise", False)
                or getattr(args, "linewidth_mhz", None) is not None
                or getattr(args, "mismatch_cm", None) is not None)
    if wants_pn:
        lw = (args.linewidth_mhz if args.linewidth_mhz is not None
              else cfg.link.linewidth_mhz)
        mm = (args.mismatch_cm if args.mismatch_cm is not None
              else cfg.link.path_mismatch_cm)
        pn = PhaseNoise(linewidth_mhz=lw, path_mismatch_cm=mm,
                        group_index=cfg.link.group_index)
    return link_cfg, pn, target


def _phase_noise_summary(pn: PhaseNoise | None) -> dict:
    if pn is None:
        return {"enabled": False}
    return {"enabled": True, "linewidth_mhz": pn.linewidth_mhz,
            "path_mismatch_cm": pn.path_mismatch_cm,
            "group_index": pn.group_index, "sigma_rad": pn.sigma_rad}


# ---------------------------------------------------------------------------
# subcommands


def cmd_tune(args, cfg: ExperimentConfig, out: Path) -> int:
    mrm, template, spec, solution = _tune(cfg)
    print(f"heater_top_mw      = {solution.heater_top_mw:.6f}")
    print(f"heater_bottom_mw   = {solution.heater_bottom_mw:.6f}")
    print(f"phi_ps_deg         = {math.degrees(solution.phi_ps):.4f}")
    print(f"detuning_offset_pm = {solution.detuning_offset_pm:.4f}")
    print(f"oma_e              = {solution.achieved_oma_e:.6f}")
    print(f"phase_error_deg    = {solution.achieved_phase_error_deg:.6f}")
    _say_wrote(_write_bias_solution(out, solution))
    deltas, phis, oma, offset, feasible = detuning_phase_surface(template,
                                                                 spec)
    rows = []
    for i, delta in enumerate(deltas):
        for j, phi in enumerate(phis):
            rows.append((delta, math.degrees(phi), oma[i, j], offset[i, j],
                         feasible[i, j]))
    _say_wrote(write_csv(
        out / "tuner_surface.csv",
        ["detuning_pm", "phi_ps_deg", "oma_e_unit_input", "offset_unit_input",
         "feasible"], rows))
    return EXIT_OK


def cmd_levels(args, cfg: ExperimentConfig, out: Path) -> int:
    _, _, _, solution = _tune(cfg)
    for k, entry in enumerate(solution.drive_table.entries):
        print(f"level {k}: v_top {entry.v_top:+.4f} V, "
              f"v_bottom {entry.v_bottom:+.4f} V, "
              f"field {entry.field_level:.6f}")
    print(f"oma_e = {solution.achieved_oma_e:.6f}")
    _say_wrote(_write_drive_levels(out, solution))
    _say_wrote(_write_bias_solution(out, solution))
    return EXIT_OK


def cmd_eye(args, cfg: ExperimentConfig, out: Path) -> int:
    _, _, _, solution = _tune(cfg)
    wave_i, wave_q = _make_waves(cfg, solution)
    eye_amp, eye_phase, metrics = simulate_eye(
        solution.config, wave_i, wave_q, cfg.transient.samples_per_ui)
    levels = ", ".join(f"{v:.4f}" for v in metrics.sampled_levels)
    print(f"sampled_levels     = {levels}")
    print(f"oma_e              = {metrics.oma_e:.6f}")
    print(f"phase_error_deg    = {metrics.phase_error_deg:.4f}")
    openings = ", ".join(f"{v:.4f}" for v in metrics.inner_eye_openings)
    print(f"inner_eye_openings = {openings}")
    _say_wrote(_write_eye(out, eye_amp, "eye_amplitude.csv",
                          "field_level_unit_input"))
    _say_wrote(_write_eye(out, eye_phase, "eye_phase.csv", "phase_rad"))
    _say_wrote(write_json(out / "eye_metrics.json", metrics))
    return EXIT_OK


def cmd_constellation(args, cfg: ExperimentConfig, out: Path) -> int:
    _, _, _, solution = _tune(cfg)
    con: Constellation = build_constellation(
        solution.config, solution.config,
        solution.drive_table, solution.drive_table)
    n = len(solution.drive_table.entries)
    rows = []
    for k, point in enumerate(con.points):
        rows.append((k, k // n, k % n, point.re, point.im, point.magnitude,
                     point.magnitude ** 2))
    _say_wrote(write_csv(
        out / "constellation.csv",
        ["point_index", "i_index", "q_index", "field_re_unit_input",
         "field_im_unit_input", "field_magnitude", "power_fraction"], rows))
    summary = {
        "n_points": len(con.points),
        "offset": {"re": con.offset.re, "im": con.offset.im,
                   "magnitude": con.offset.magnitude},
        "oma_e_per_dimension": con.oma_e_per_dimension,
    }
    _say_wrote(write_json(out / "constellation_summary.json", summary))
    print(f"points = {len(con.points)}, "
          f"offset magnitude = {con.offset.magnitude:.6f}, "
          f"oma_e per dimension = {con.oma_e_per_dimension:.6f}")
    return EXIT_OK


def cmd_thermal(args, cfg: ExperimentConfig, out: Path) -> int:
    mrm = cfg.mrm()
    kwargs = _thermal_kwargs(cfg)
    up, down, report = sweep_and_diagnose(mrm, cfg.thermal.input_power_dbm,
                                          **kwargs)
    verdict = "UNSTABLE" if is_unstable(report) else "stable"
    print(f"input power {cfg.thermal.input_power_dbm:+.2f} dBm: {verdict} "
          f"(hysteresis gap {report.max_hysteresis_gap:.4g}, "
          f"max jump {report.max_jump:.4g})")
    extra = {"input_power_dbm": cfg.thermal.input_power_dbm}
    if args.find_onset:
        onset = instability_onset(mrm, cfg.thermal.onset_min_dbm,
                                  cfg.thermal.onset_max_dbm,
                                  cfg.thermal.onset_iterations, **kwargs)
        extra["instability_onset_dbm"] = onset
        if onset is None:
            print(f"no instability up to {cfg.thermal.onset_max_dbm:+.2f} dBm")
        else:
            print(f"instability onset = {onset:+.4f} dBm")
    _write_thermal(out, up, down, report, extra)
    return EXIT_OK


def cmd_ber_sweep(args, cfg: ExperimentConfig, out: Path) -> int:
    link_cfg, pn, target = _effective_link(cfg, args)
    grid = np.linspace(cfg.link.power_min_dbm, cfg.link.power_max_dbm,
                       cfg.link.power_points)
    if pn is not None:
        values = [ber_with_phase_noise(link_cfg, p, pn.linewidth_mhz,
                                       pn.path_mismatch_cm, pn.group_index)
                  for p in grid]
    else:
        values = [ber(link_cfg, p) for p in grid]
    _say_wrote(write_csv(out / "ber_sweep.csv",
                         ["laser_power_dbm", "ber"],
                         zip(grid, values)))
    try:
        required = required_power(link_cfg, target, pn)
    except UnreachableTargetError:
        required = None
    summary = {
        "format": link_cfg.format,
        "architecture": link_cfg.architecture,
        "datarate_gbps": link_cfg.datarate_gbps,
        "baud_gbd": link_cfg.baud_gbd,
        "target_ber": target,
        "phase_noise": _phase_noise_summary(pn),
        "required_power_dbm": required,
        "laser_energy_fj_per_bit_at_10pct_wpe": (
            None if required is None
            else laser_energy_fj_per_bit(required, link_cfg.datarate_gbps)),
    }
    if required is None:
        print(f"target BER {target:g} unreachable below the power cap")
    else:
        print(f"required power for BER {target:g}: {required:.4f} dBm")
    if args.mc_symbols > 0 and required is not None:
        checks = []
        for shift in (-1.0, 0.0, 1.0):
            p = float(np.clip(required + shift, grid[0], grid[-1]))
            mc = simulate_ber_monte_carlo(link_cfg, p,
                                          n_symbols=args.mc_symbols,
                                          seed=cfg.seed)
            checks.append({"laser_power_dbm": p, "mc_ber": mc,
                           "analytic_ber": ber(link_cfg, p),
                           "n_symbols": args.mc_symbols, "seed": cfg.seed})
            print(f"mc check @ {p:.4f} dBm: simulated {mc:.3e}, "
                  f"analytic {checks[-1]['analytic_ber']:.3e}")
        summary["monte_carlo"] = checks
    _say_wrote(write_json(out / "ber_summary.json", summary))
    return EXIT_OK


def cmd_compare(args, cfg: ExperimentConfig, out: Path) -> int:
    _, pn, target = _effective_link(cfg, args)
    datarate = (args.datarate if args.datarate is not None
                else cfg.link.datarate_gbps)
    comp = compare_formats(datarate,
                           (cfg.link.power_min_dbm, cfg.link.power_max_dbm),
                           cfg.link.power_points, phase_noise=pn,
                           target_ber=target)
    grid = comp.curves[LINK_FORMATS[0]].laser_powers_dbm
    header = ["laser_power_dbm"] + [f"ber_{fmt}" for fmt in LINK_FORMATS]
    rows = []
    for k, p in enumerate(grid):
        rows.append((p, *(comp.curves[fmt].ber[k] for fmt in LINK_FORMATS)))
    _say_wrote(write_csv(out / "format_comparison.csv", header, rows))
    energy = {fmt: laser_energy_fj_per_bit(req, datarate)
              for fmt, req in comp.required_power_dbm.items()}
    summary = {
        "datarate_gbps": datarate,
        "target_ber": target,
        "phase_noise": _phase_noise_summary(pn),
        "required_power_dbm": comp.required_power_dbm,
        "laser_energy_fj_per_bit_at_10pct_wpe": energy,
        "gaps_db": comp.gaps_db,
    }
    _say_wrote(write_json(out / "comparison_summary.json", summary))
    print(f"required laser power at BER {target:g}, {datarate:g} Gb/s:")
    for fmt in sorted(LINK_FORMATS, key=lambda f: comp.required_power_dbm[f]):
        print(f"  {fmt:<10s} {comp.required_power_dbm[fmt]:8.4f} dBm   "
              f"{energy[fmt]:8.2f} fJ/bit at 10% WPE")
    return EXIT_OK


def cmd_reproduce(args, cfg: ExperimentConfig, out: Path) -> int:
    checks = []

    def check(name: str, passed: bool, detail: str) -> None:
        checks.append({"name": name, "passed": bool(passed),
                       "detail": detail})
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

    # stage 1: device calibration and static bias tuning
    mrm, template, spec, solution = _tune(cfg)
    _say_wrote(_write_bias_solution(out, solution))
    _say_wrote(_write_drive_levels(out, solution))
    check("bias-phase-spread", solution.achieved_phase_error_deg < 3.0,
          f"{solution.achieved_phase_error_deg:.4f} deg < 3 deg")
    levels = np.sort(solution.drive_table.levels)
    nominal = np.array([0.08, 0.293, 0.507, 0.72])
    worst = float(np.max(np.abs(levels - nominal)))
    check("alphabet-levels",
          solution.achieved_oma_e >= 0.60 and worst <= 0.05,
          f"oma_e {solution.achieved_oma_e:.4f} >= 0.60, "
          f"worst level miss {worst:.4f} <= 0.05")

    # stage 2: time-domain eyes
    wave_i, wave_q = _make_waves(cfg, solution)
    eye_amp, eye_phase, metrics = simulate_eye(
        solution.config, wave_i, wave_q, cfg.transient.samples_per_ui)
    _say_wrote(write_json(out / "eye_metrics.json", metrics))
    gaps = np.diff(np.sort(np.asarray(metrics.sampled_levels)))
    openings = np.asarray(metrics.inner_eye_openings)
    check("eye-resolvable-levels",
          len(metrics.sampled_levels) == 4 and np.all(gaps > 0.0)
          and np.all(openings > 0.0),
          f"4 levels, min gap {np.min(gaps):.4f}, "
          f"min opening {np.min(openings):.4f}")
    check("eye-phase-spread", metrics.phase_error_deg < 3.0,
          f"{metrics.phase_error_deg:.4f} deg < 3 deg")
    t = cfg.transient
    inf_i = generate_prbs_drive(t.prbs_order, t.baud_rate_gbd,
                                solution.drive_table, t.rise_fall_fraction,
                                eo_bandwidth_ghz=math.inf)
    inf_q = generate_prbs_drive(t.prbs_order, t.baud_rate_gbd,
                                solution.drive_table, t.rise_fall_fraction,
                                eo_bandwidth_ghz=math.inf,
                                symbol_offset=t.q_symbol_offset)
    _, _, inf_metrics = simulate_eye(solution.config, inf_i, inf_q,
                                     t.samples_per_ui)
    static_miss = float(np.max(np.abs(
        np.sort(np.asarray(inf_metrics.sampled_levels)) - levels)))
    check("eye-infinite-bandwidth-static",
          static_miss <= 1e-9,
          f"sampled-vs-static miss {static_miss:.2e} <= 1e-9")

    # stage 3: link budgets on a freshly calibrated noise bandwidth
    beta = calibrate_noise_bandwidth()
    anchor_cfg = replace(cfg.link_config("ROQ16", 200.0),
                         noise_bandwidth_factor=beta)
    anchor = required_power(anchor_cfg, 1e-6)
    check("calibration-anchor", abs(anchor - 6.71) < 5e-3,
          f"beta {beta:.6f} puts ROQ16 at 200 Gb/s at {anchor:.4f} dBm "
          "(anchor 6.71)")

    def req(fmt: str, rate: float, pn: PhaseNoise | None = None,
            offset: float | None = None) -> float:
        link_cfg = replace(cfg.link_config(fmt, rate),
                           noise_bandwidth_factor=beta)
        if offset is not None:
            link_cfg = replace(link_cfg, ramzi_offset=offset)
        return required_power(link_cfg, 1e-6, pn)

    required = {(fmt, rate): req(fmt, rate)
                for rate in (200.0, 400.0) for fmt in LINK_FORMATS}
    r400 = required[("ROQ16", 400.0)]
    check("required-power-roq16-400g", 9.15 <= r400 <= 10.15,
          f"{r400:.4f} dBm inside [9.15, 10.15]")
    for rate, lo, hi in ((200.0, 3.8, 6.8), (400.0, 6.2, 9.2)):
        gap = required[("MRM-PAM4", rate)] - required[("ROQ16", rate)]
        check(f"imdd-penalty-{rate:g}g", lo <= gap <= hi,
              f"MRM-PAM4 minus ROQ16 = {gap:+.4f} dB inside "
              f"[{lo:g}, {hi:g}]")
    for rate in (200.0, 400.0):
        gap = abs(required[("ROQ16", rate)] - required[("MZI-QAM16", rate)])
        check(f"roq16-vs-qam16-{rate:g}g", gap <= 1.0,
              f"|gap| = {gap:.4f} dB <= 1 dB")
        best = min(LINK_FORMATS, key=lambda f: required[(f, rate)])
        check(f"qam4-minimum-{rate:g}g", best == "MZI-QAM4",
              f"lowest required power: {best}")

    pn = PhaseNoise(cfg.link.linewidth_mhz, cfg.link.path_mismatch_cm,
                    cfg.link.group_index)
    for rate in (200.0, 400.0):
        roq_pn = req("ROQ16", rate, pn)
        qam_pn = req("MZI-QAM16", rate, pn)
        gap = abs(roq_pn - qam_pn)
        check(f"phase-noise-gap-{rate:g}g", gap <= 2.0,
              f"|ROQ16 - MZI-QAM16| = {gap:.4f} dB <= 2 dB at "
              f"{pn.linewidth_mhz:g} MHz / {pn.path_mismatch_cm:g} cm")
        pen_roq = roq_pn - required[("ROQ16", rate)]
        pen_zero = (req("ROQ16", rate, pn, offset=0.0)
                    - req("ROQ16", rate, offset=0.0))
        check(f"offset-phase-noise-penalty-{rate:g}g", pen_roq >= pen_zero,
              f"offset penalty {pen_roq:.4f} dB >= zero-offset "
              f"{pen_zero:.4f} dB")

    for rate in (200.0, 400.0):
        energy = laser_energy_fj_per_bit(required[("ROQ16", rate)], rate)
        check(f"laser-energy-{rate:g}g", 196.0 <= energy <= 364.0,
              f"{energy:.4f} fJ/bit inside [196, 364]")

    for rate in (200.0, 400.0):
        comp = compare_formats(rate, (cfg.link.power_min_dbm,
                                      cfg.link.power_max_dbm),
                               cfg.link.power_points)
        grid = comp.curves[LINK_FORMATS[0]].laser_powers_dbm
        header = (["laser_power_dbm"]
                  + [f"ber_{fmt}" for fmt in LINK_FORMATS])
        rows = [(p, *(comp.curves[fmt].ber[k] for fmt in LINK_FORMATS))
                for k, p in enumerate(grid)]
        _say_wrote(write_csv(out / f"comparison_{rate:g}g.csv", header,
                             rows))

    # stage 4: thermal stability
    kwargs = _thermal_kwargs(cfg)
    up, down, report = sweep_and_diagnose(mrm, -5.0, **kwargs)
    check("thermal-stable-at-minus-5dbm", not is_unstable(report),
          f"hysteresis gap {report.max_hysteresis_gap:.4g}, "
          f"max jump {report.max_jump:.4g}")
    onset = instability_onset(mrm, cfg.thermal.onset_min_dbm,
                              cfg.thermal.onset_max_dbm,
                              cfg.thermal.onset_iterations, **kwargs)
    check("thermal-onset-below-5dbm",
          onset is not None and onset <= 5.0,
          "no onset found" if onset is None
          else f"onset {onset:+.4f} dBm <= +5 dBm")
    _write_thermal(out, up, down, report,
                   {"input_power_dbm": -5.0,
                    "instability_onset_dbm": onset})

    failed = [c["name"] for c in checks if not c["passed"]]
    summary = {
        "noise_bandwidth_factor": beta,
        "required_power_dbm": {f"{fmt} at {rate:g} Gb/s": val
                               for (fmt, rate), val in required.items()},
        "checks": checks,
        "n_checks": len(checks),
        "n_failed": len(failed),
        "failed": failed,
    }
    _say_wrote(write_json(out / "acceptance_summary.json", summary))
    print(f"{len(checks) - len(failed)} of {len(checks)} checks passed")
    if failed:
        write_json(out / "error.json", {
            "command": "reproduce-paper",
            "error_type": "AcceptanceMismatch",
            "message": "failed checks: " + ", ".join(failed),
            "exit_code": EXIT_ACCEPTANCE,
        })
        return EXIT_ACCEPTANCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and entry point


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="default", metavar="PATH",
                        help="YAML config file, or the literal 'default' "
                             "for the packaged defaults")
    common.add_argument("--output-dir", default=None, metavar="DIR",
                        help="override the config's output directory")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config's random seed")

    linkopts = argparse.ArgumentParser(add_help=False)
    linkopts.add_argument("--format", choices=list(LINK_FORMATS),
                          default=None, help="link format")
    linkopts.add_argument("--datarate", type=float, default=None,
                          metavar="GBPS", help="aggregate datarate in Gb/s")
    linkopts.add_argument("--target-ber", dest="target_ber", type=float,
                          default=None, help="BER target for required power")
    linkopts.add_argument("--phase-noise", dest="phase_noise",
                          action="store_true",
                          help="include laser phase noise (coherent only)")
    linkopts.add_argument("--linewidth-mhz", dest="linewidth_mhz",
                          type=float, default=None,
                          help="laser linewidth in MHz (implies "
                               "--phase-noise)")
    linkopts.add_argument("--mismatch-cm", dest="mismatch_cm", type=float,
                          default=None,
                          help="signal/LO path mismatch in cm (implies "
                               "--phase-noise)")

    parser = _Parser(prog="ramzisim",
                     description="Offset-QAM ring-assisted MZI transmitter "
                                 "simulation toolkit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("tune", parents=[common],
                       help="find the static bias point and dump the "
                            "objective surface")
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("levels", parents=[common],
                       help="solve the four-level drive table at the tuned "
                            "bias")
    p.set_defaults(handler=cmd_levels)

    p = sub.add_parser("eye", parents=[common],
                       help="time-domain amplitude and phase eye diagrams")
    p.set_defaults(handler=cmd_eye)

    p = sub.add_parser("constellation", parents=[common],
                       help="16-point offset-QAM constellation at the tuned "
                            "bias")
    p.set_defaults(handler=cmd_constellation)

    p = sub.add_parser("thermal-sweep", parents=[common],
                       help="bidirectional heater sweep with stability "
                            "diagnosis")
    p.add_argument("--find-onset", action="store_true",
                   help="bisect the optical power where instability starts")
    p.set_defaults(handler=cmd_thermal)

    p = sub.add_parser("ber-sweep", parents=[common, linkopts],
                       help="BER versus laser power for one format")
    p.add_argument("--mc-symbols", dest="mc_symbols", type=int, default=0,
                   metavar="N",
                   help="verify the curve with an N-symbol Monte Carlo run "
                        "near the required power (0 disables)")
    p.set_defaults(handler=cmd_ber_sweep)

    p = sub.add_parser("compare", parents=[common, linkopts],
                       help="all formats on a common power grid")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("reproduce-paper", parents=[common],
                       help="full pipeline: calibrate, tune, eye, link "
                            "curves and thermal sweep, checked against "
                            "their expected ranges")
    p.set_defaults(handler=cmd_reproduce)

    return parser


def _report_failure(out: Path, command: str, exc: BaseException,
                    code: int) -> int:
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", {
            "command": command,
            "error_type": type(exc).__name__,
            "message": str(exc),
            "exit_code": code,
        })
    except OSError:
        pass
    print(f"error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if getattr(args, "command", None) is None or not hasattr(args, "handler"):
        parser.print_usage(sys.stderr)
        print("error: a command is required", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.output_dir) if args.output_dir else None
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"seed must be >= 0, got {args.seed}")
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if out is None:
            out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        stale = out / "error.json"
        rc = args.handler(args, cfg, out)
        if rc == EXIT_OK and stale.exists():
            stale.unlink()
        return rc
    except (ConfigError, ValueError) as exc:
        return _report_failure(out or Path("."), args.command, exc,
                               EXIT_CONFIG)
    except RamziSimError as exc:
        return _report_failure(out or Path("."), args.command, exc,
                               EXIT_NUMERICAL)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _report_failure(out or Path("."), args.command, exc,
                               EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
