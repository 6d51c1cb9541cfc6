"""Experiment configuration: one structured file drives every command.

The schema is strict: unknown keys are rejected by name, every value
is type- and range-checked at load time, and each section maps onto
the constructor of the module it configures.  A fully explicit
defaults file ships inside the package; ``load_config(None)`` or the
literal name ``"default"`` loads it.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .circuit import RamziConfig
from .devices import MrmModel, calibrate_mrm
from .errors import ConfigError
from .link import LINK_FORMATS, LinkConfig, PhaseNoise
from .tuning import SweepSpec

DEFAULTS_RESOURCE = "defaults.yaml"


def _positive(v) -> bool:
    return v > 0


def _non_negative(v) -> bool:
    return v >= 0


def _finite(v) -> bool:
    return math.isfinite(v)


@dataclass(frozen=True)
class DeviceSection:
    """Microring calibration targets; feeds calibrate_mrm()."""

    target_q: float = 3500.0
    efficiency_pm_per_v: float = 45.0
    coupling_regime: str = "critical"
    radius_um: float = 7.5
    group_index: float = 4.2
    design_wavelength_nm: float = 1310.0
    regime_ratio: float = 1.05
    thermal_shift_coefficient_pm_per_mw: float = 1900.0
    thermal_time_constant_s: float = 1.0e-3
    absorbed_fraction: float = 0.375
    bias_heater_target_mw: float = 22.25

    _CHECKS = {
        "target_q": (lambda v: v > 100.0, "must exceed 100"),
        "efficiency_pm_per_v": (_positive, "must be positive"),
        "coupling_regime": (lambda v: v in ("critical", "under", "over"),
                            "must be one of critical, under, over"),
        "radius_um": (_positive, "must be positive"),
        "group_index": (_positive, "must be positive"),
        "design_wavelength_nm": (_positive, "must be positive"),
        "regime_ratio": (lambda v: v >= 1.0, "must be >= 1"),
        "thermal_shift_coefficient_pm_per_mw": (_positive,
                                                "must be positive"),
        "thermal_time_constant_s": (_positive, "must be positive"),
        "absorbed_fraction": (lambda v: 0.0 <= v <= 1.0,
                              "must lie in [0, 1]"),
        "bias_heater_target_mw": (_non_negative, "must be >= 0"),
    }


@dataclass(frozen=True)
class RamziSection:
    """Circuit-level settings shared by both transmitter dimensions."""

    laser_wavelength_nm: float = 1310.0

    _CHECKS = {
        "laser_wavelength_nm": (_positive, "must be positive"),
    }


@dataclass(frozen=True)
class TunerSection:
    """Static bias search grids; mirrors SweepSpec."""

    objective: str = "blend"
    detuning_min_pm: float = 10.0
    detuning_max_pm: float = 200.0
    detuning_step_pm: float = 2.0
    phi_ps_steps: int = 720
    voltage_points: int = 401
    drive_min_v: float = -4.0
    drive_max_v: float = 0.0
    target_offset: float = 0.40
    offset_weight: float = 4.0
    amplitude_tolerance: float = 0.01
    phase_tolerance_deg: float = 3.0
    spacing_tolerance: float = 0.02

    _CHECKS = {
        "objective": (lambda v: v in ("blend", "max_oma"),
                      "must be 'blend' or 'max_oma'"),
        "detuning_min_pm": (_non_negative, "must be >= 0"),
        "detuning_max_pm": (_positive, "must be positive"),
        "detuning_step_pm": (_positive, "must be positive"),
        "phi_ps_steps": (lambda v: v >= 8, "must be at least 8"),
        "voltage_points": (lambda v: v >= 3, "must be at least 3"),
        "drive_min_v": (_finite, "must be finite"),
        "drive_max_v": (_finite, "must be finite"),
        "target_offset": (_non_negative, "must be >= 0"),
        "offset_weight": (_non_negative, "must be >= 0"),
        "amplitude_tolerance": (_non_negative, "must be >= 0"),
        "phase_tolerance_deg": (_non_negative, "must be >= 0"),
        "spacing_tolerance": (_non_negative, "must be >= 0"),
    }


@dataclass(frozen=True)
class TransientSection:
    """Eye-diagram generation settings."""

    baud_rate_gbd: float = 50.0
    eo_bandwidth_ghz: float = 35.0
    prbs_order: int = 7
    rise_fall_fraction: float = 0.2
    samples_per_ui: int = 32
    q_symbol_offset: int = 63

    _CHECKS = {
        "baud_rate_gbd": (_positive, "must be positive"),
        "eo_bandwidth_ghz": (_positive, "must be positive"),
        "prbs_order": (lambda v: v in (7, 15, 31), "must be 7, 15 or 31"),
        "rise_fall_fraction": (lambda v: 0.0 <= v < 0.5,
                               "must lie in [0, 0.5)"),
        "samples_per_ui": (lambda v: v >= 4 and v % 2 == 0,
                           "must be an even integer >= 4"),
        "q_symbol_offset": (_non_negative, "must be >= 0"),
    }


@dataclass(frozen=True)
class ThermalSection:
    """Heater sweep and instability-onset settings."""

    input_power_dbm: float = -5.0
    heater_min_mw: float = 21.0
    heater_max_mw: float = 23.5
    n_steps: int = 1024
    settle_taus: float = 25.0
    drive_rate_hz: float = 2.0e5
    onset_min_dbm: float = -20.0
    onset_max_dbm: float = 5.0
    onset_iterations: int = 8

    _CHECKS = {
        "input_power_dbm": (_finite, "must be finite"),
        "heater_min_mw": (_non_negative, "must be >= 0"),
        "heater_max_mw": (_positive, "must be positive"),
        "n_steps": (lambda v: v >= 2, "must be at least 2"),
        "settle_taus": (lambda v: v >= 10.0,
                        "must be at least 10 time constants"),
        "drive_rate_hz": (_positive, "must be positive"),
        "onset_min_dbm": (_finite, "must be finite"),
        "onset_max_dbm": (_finite, "must be finite"),
        "onset_iterations": (lambda v: v >= 1, "must be at least 1"),
    }


@dataclass(frozen=True)
class LinkSection:
    """Link budget parameters; mirrors LinkConfig plus sweep ranges."""

    format: str = "ROQ16"
    datarate_gbps: float = 200.0
    gc_loss_db: float = 1.8
    muxdemux_loss_db: float = 2.8
    margin_db: float = 5.0
    responsivity_a_w: float = 1.0
    mzi_il_db: float = 4.0
    ramzi_offset: float = 0.42
    ramzi_oma_e: float = 0.64
    mrm_oma: float = 0.4
    mzi_oma_e: float = 2.0
    mzi_oma: float = 1.0
    afe_noise_a_rthz: float = 1.5e-11
    comparator_threshold_a: float = 5.0e-6
    mrm_bandwidth_ghz: float = 67.0
    mzi_bandwidth_ghz: float = 100.0
    lo_split_fraction: float = 0.5
    noise_bandwidth_factor: float = 0.328162082006
    target_ber: float = 1.0e-6
    power_min_dbm: float = 0.0
    power_max_dbm: float = 17.0
    power_points: int = 69
    linewidth_mhz: float = 1.0
    path_mismatch_cm: float = 1.0
    group_index: float = 1.468

    _CHECKS = {
        "format": (lambda v: v in LINK_FORMATS,
                   "must be one of " + ", ".join(LINK_FORMATS)),
        "datarate_gbps": (_positive, "must be positive"),
        "gc_loss_db": (_non_negative, "must be >= 0"),
        "muxdemux_loss_db": (_non_negative, "must be >= 0"),
        "margin_db": (_non_negative, "must be >= 0"),
        "responsivity_a_w": (_positive, "must be positive"),
        "mzi_il_db": (_non_negative, "must be >= 0"),
        "ramzi_offset": (_non_negative, "must be >= 0"),
        "ramzi_oma_e": (_positive, "must be positive"),
        "mrm_oma": (_positive, "must be positive"),
        "mzi_oma_e": (_positive, "must be positive"),
        "mzi_oma": (_positive, "must be positive"),
        "afe_noise_a_rthz": (_positive, "must be positive"),
        "comparator_threshold_a": (_non_negative, "must be >= 0"),
        "mrm_bandwidth_ghz": (_positive, "must be positive"),
        "mzi_bandwidth_ghz": (_positive, "must be positive"),
        "lo_split_fraction": (lambda v: 0.0 < v < 1.0,
                              "must lie in (0, 1)"),
        "noise_bandwidth_factor": (_positive, "must be positive"),
        "target_ber": (lambda v: 0.0 < v < 0.1, "must lie in (0, 0.1)"),
        "power_min_dbm": (_finite, "must be finite"),
        "power_max_dbm": (_finite, "must be finite"),
        "power_points": (lambda v: v >= 2, "must be at least 2"),
        "linewidth_mhz": (_non_negative, "must be >= 0"),
        "path_mismatch_cm": (_non_negative, "must be >= 0"),
        "group_index": (_positive, "must be positive"),
    }


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated top-level configuration with section builders."""

    seed: int = 20260814
    output_dir: str = "results"
    device: DeviceSection = field(default_factory=DeviceSection)
    ramzi: RamziSection = field(default_factory=RamziSection)
    tuner: TunerSection = field(default_factory=TunerSection)
    transient: TransientSection = field(default_factory=TransientSection)
    thermal: ThermalSection = field(default_factory=ThermalSection)
    link: LinkSection = field(default_factory=LinkSection)

    _CHECKS = {
        "seed": (_non_negative, "must be >= 0"),
        "output_dir": (lambda v: len(v) > 0, "must be a non-empty path"),
    }

    def mrm(self) -> MrmModel:
        d = self.device
        return calibrate_mrm(
            d.target_q, d.efficiency_pm_per_v, d.coupling_regime,
            radius_um=d.radius_um, group_index=d.group_index,
            design_wavelength_nm=d.design_wavelength_nm,
            regime_ratio=d.regime_ratio,
            thermal_shift_coefficient_pm_per_mw=(
                d.thermal_shift_coefficient_pm_per_mw),
            thermal_time_constant_s=d.thermal_time_constant_s,
            absorbed_fraction=d.absorbed_fraction,
            bias_heater_target_mw=d.bias_heater_target_mw)

    def ramzi_template(self, mrm: MrmModel | None = None) -> RamziConfig:
        model = mrm if mrm is not None else self.mrm()
        return RamziConfig(mrm_top=model, mrm_bottom=model, phi_ps=0.0,
                           detuning_offset_pm=0.0,
                           laser_wavelength_nm=self.ramzi.laser_wavelength_nm,
                           heater_top_mw=0.0, heater_bottom_mw=0.0)

    def sweep_spec(self) -> SweepSpec:
        t = self.tuner
        return SweepSpec(
            detuning_min_pm=t.detuning_min_pm,
            detuning_max_pm=t.detuning_max_pm,
            detuning_step_pm=t.detuning_step_pm,
            phi_ps_steps=t.phi_ps_steps,
            voltage_points=t.voltage_points,
            drive_min_v=t.drive_min_v,
            drive_max_v=t.drive_max_v,
            objective=t.objective,
            target_offset=t.target_offset,
            offset_weight=t.offset_weight,
            amplitude_tolerance=t.amplitude_tolerance,
            phase_tolerance_deg=t.phase_tolerance_deg,
            spacing_tolerance=t.spacing_tolerance)

    def link_config(self, fmt: str | None = None,
                    datarate_gbps: float | None = None) -> LinkConfig:
        s = self.link
        return LinkConfig(
            format=fmt if fmt is not None else s.format,
            datarate_gbps=(datarate_gbps if datarate_gbps is not None
                           else s.datarate_gbps),
            gc_loss_db=s.gc_loss_db,
            muxdemux_loss_db=s.muxdemux_loss_db,
            margin_db=s.margin_db,
            responsivity_a_w=s.responsivity_a_w,
            mzi_il_db=s.mzi_il_db,
            ramzi_offset=s.ramzi_offset,
            ramzi_oma_e=s.ramzi_oma_e,
            mrm_oma=s.mrm_oma,
            mzi_oma_e=s.mzi_oma_e,
            mzi_oma=s.mzi_oma,
            afe_noise_a_rthz=s.afe_noise_a_rthz,
            comparator_threshold_a=s.comparator_threshold_a,
            mrm_bandwidth_ghz=s.mrm_bandwidth_ghz,
            mzi_bandwidth_ghz=s.mzi_bandwidth_ghz,
            lo_split_fraction=s.lo_split_fraction,
            noise_bandwidth_factor=s.noise_bandwidth_factor)

    def phase_noise(self) -> PhaseNoise:
        return PhaseNoise(linewidth_mhz=self.link.linewidth_mhz,
                          path_mismatch_cm=self.link.path_mismatch_cm,
                          group_index=self.link.group_index)


_SECTIONS = {
    "device": DeviceSection,
    "ramzi": RamziSection,
    "tuner": TunerSection,
    "transient": TransientSection,
    "thermal": ThermalSection,
    "link": LinkSection,
}


def _coerce(value, expected_type, path: str):
    if expected_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path} must be a number, got {value!r}")
        if not math.isfinite(float(value)):
            raise ConfigError(f"{path} must be finite, got {value!r}")
        return float(value)
    if expected_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path} must be an integer, got {value!r}")
        return value
    if expected_type is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path} must be a string, got {value!r}")
        return value
    raise ConfigError(f"{path}: unsupported schema type {expected_type}")


def _run_checks(obj, prefix: str) -> None:
    for name, (predicate, message) in type(obj)._CHECKS.items():
        value = getattr(obj, name)
        if not predicate(value):
            key = f"{prefix}.{name}" if prefix else name
            raise ConfigError(f"{key} {message}, got {value!r}")


def _build_section(cls, data, prefix: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{prefix} must be a mapping of settings")
    allowed = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {prefix}.{key}")
        expected = type(allowed[key].default)
        kwargs[key] = _coerce(value, expected, f"{prefix}.{key}")
    section = cls(**kwargs)
    _run_checks(section, prefix)
    return section


def parse_config(data: dict | None) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a parsed mapping."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    top_fields = {"seed": int, "output_dir": str}
    kwargs = {}
    for key, value in data.items():
        if key in top_fields:
            kwargs[key] = _coerce(value, top_fields[key], key)
        elif key in _SECTIONS:
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        else:
            raise ConfigError(f"unknown key {key}")
    cfg = ExperimentConfig(**kwargs)
    _run_checks(cfg, "")
    # Cross-field constraints that single-key predicates cannot express.
    if cfg.tuner.detuning_max_pm < cfg.tuner.detuning_min_pm:
        raise ConfigError("tuner.detuning_max_pm must be >= "
                          "tuner.detuning_min_pm")
    if cfg.tuner.drive_min_v >= cfg.tuner.drive_max_v:
        raise ConfigError("tuner.drive_min_v must be below "
                          "tuner.drive_max_v")
    if cfg.thermal.heater_min_mw >= cfg.thermal.heater_max_mw:
        raise ConfigError("thermal.heater_min_mw must be below "
                          "thermal.heater_max_mw")
    if cfg.thermal.onset_min_dbm >= cfg.thermal.onset_max_dbm:
        raise ConfigError("thermal.onset_min_dbm must be below "
                          "thermal.onset_max_dbm")
    if cfg.link.power_min_dbm >= cfg.link.power_max_dbm:
        raise ConfigError("link.power_min_dbm must be below "
                          "link.power_max_dbm")
    return cfg


def load_config(source: str | Path | None = None) -> ExperimentConfig:
    """Load and validate a config file.

    ``None`` or the literal name ``"default"`` loads the defaults file
    shipped inside the package.
    """
    if source is None or source == "default":
        text = (resources.files("ramzisim") / DEFAULTS_RESOURCE).read_text()
    else:
        path = Path(source)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return parse_config(data)


def default_config() -> ExperimentConfig:
    return load_config(None)
