"""Static bias tuning for one RAMZI dimension.

The tuner works in two stages.  Stage one sweeps the symmetric detuning
offset and the arm phase shifter over a grid, evaluating only the two
push-pull drive extremes, and picks the grid point that maximizes the
selected objective.  Stage two solves for the intermediate drive pairs
along the push-pull manifold (v_top + v_bottom held at the swing sum)
so the signed field levels come out evenly spaced.

Objectives:

* ``max_oma``: field-domain modulation amplitude |E_hi| - |E_lo| between
  the (min, max) and (max, min) drive extremes.  Zero-detuning grid
  points are rejected for this objective; without an offset the search
  collapses onto degenerate contrast-free solutions.
* ``target_offset``: minimize the distance of the alphabet midpoint
  from the requested carrier offset.
* ``blend`` (default): OMA minus ``offset_weight`` times the offset
  error.  Pure OMA maximization drives the lowest level into the ring
  null, which wrecks the level alphabet; the blend keeps the alphabet
  centered while giving up almost no amplitude.

Ties on the objective are broken toward the smallest detuning, then the
smallest phase-shifter magnitude (wrap-aware), then the smallest raw
phase value, so results are deterministic.

Static tuning is a quasi-static calculation: it evaluates the ring maps
with self-heating absent, which is the low-power (about -20 dBm) limit
used for cold bias acquisition.  Re-acquiring bias under optical load is
``retune_at_power``, which leans on the thermal model.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .circuit import (
    DriveLevelEntry,
    DriveLevelTable,
    RamziConfig,
    phase_spread_deg,
    ramzi_oma_e,
    signed_level,
    validate_drive_table,
)
from .devices import MrmModel, fsr_nm, ring_field_response
from .errors import (InfeasibleBiasError, SpacingResidualWarning,
                     ThermalInstabilityError)
from .thermal import (DEFAULT_AMBIENT_K, DEFAULT_DRIVE_RATE_HZ,
                      dither_absorbed_power_mw, local_loop_gain,
                      settled_dither_temperature_k,
                      zero_light_steady_temperature_k)

_OBJECTIVES = ("max_oma", "target_offset", "blend")


@dataclass(frozen=True)
class SweepSpec:
    """Grids, tolerances and objective for the static tuner."""

    detuning_min_pm: float = 10.0
    detuning_max_pm: float = 200.0
    detuning_step_pm: float = 2.0
    phi_ps_steps: int = 720
    voltage_points: int = 401
    drive_min_v: float = -4.0
    drive_max_v: float = 0.0
    objective: str = "blend"
    target_offset: float = 0.40
    offset_weight: float = 4.0
    amplitude_tolerance: float = 0.01
    phase_tolerance_deg: float = 3.0
    spacing_tolerance: float = 0.02

    def __post_init__(self) -> None:
        if self.objective not in _OBJECTIVES:
            raise ValueError(
                f"unknown objective {self.objective!r}; "
                f"expected one of {_OBJECTIVES}")
        if self.detuning_min_pm < 0.0 or self.detuning_max_pm < self.detuning_min_pm:
            raise ValueError("detuning grid bounds must satisfy 0 <= min <= max")
        if self.detuning_step_pm <= 0.0:
            raise ValueError("detuning_step_pm must be positive")
        if self.phi_ps_steps < 8:
            raise ValueError("phi_ps_steps must be at least 8")
        if self.voltage_points < 3:
            raise ValueError("voltage_points must be at least 3")
        if not self.drive_min_v < self.drive_max_v:
            raise ValueError("drive_min_v must be below drive_max_v")
        for name in ("amplitude_tolerance", "spacing_tolerance",
                     "phase_tolerance_deg", "offset_weight"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def v_mid(self) -> float:
        return 0.5 * (self.drive_min_v + self.drive_max_v)


@dataclass(frozen=True)
class BiasSolution:
    """Result of a tuning run: bias actuators plus the realized alphabet.

    ``heater_top_mw`` / ``heater_bottom_mw`` are the physical heater
    settings.  ``config`` carries the equivalent zero-self-heating
    placement used to evaluate the circuit; for a static (low-power)
    solution its heater fields coincide with the physical ones, while
    after retune_at_power they differ by the absorbed optical power that
    now does part of the heating.
    """

    heater_top_mw: float
    heater_bottom_mw: float
    phi_ps: float
    detuning_offset_pm: float
    drive_table: DriveLevelTable
    achieved_oma_e: float
    achieved_phase_error_deg: float
    objective_value: float
    config: RamziConfig = field(repr=False)


def _delta_grid(spec: SweepSpec) -> np.ndarray:
    n = int(math.floor((spec.detuning_max_pm - spec.detuning_min_pm)
                       / spec.detuning_step_pm + 1e-9)) + 1
    return spec.detuning_min_pm + spec.detuning_step_pm * np.arange(n)


def _phi_grid(spec: SweepSpec) -> np.ndarray:
    return 2.0 * math.pi * np.arange(spec.phi_ps_steps) / spec.phi_ps_steps


def _drive_shift_pm(model: MrmModel, v: float) -> float:
    return (model.modulation_efficiency_pm_per_v * v
            + model.modulation_efficiency_quadratic_pm_per_v2 * v * v)


def heater_power_for_offset_mw(model: MrmModel, laser_wavelength_nm: float,
                               target_offset_pm: float, v_mid: float) -> float:
    """Heater power placing the mid-swing resonance at laser + offset.

    The resonance map is affine in heater power, so this is an exact
    inversion.  A negative result means the rest resonance already sits
    red of the target and the (heat-only) tuner cannot reach it.
    """
    target_nm = laser_wavelength_nm + target_offset_pm / 1.0e3
    budget_pm = ((target_nm - model.resonance_wavelength_at_rest_nm) * 1.0e3
                 - _drive_shift_pm(model, v_mid))
    return budget_pm / model.thermal_shift_coefficient_pm_per_mw


def _arm_extreme_fields(model: MrmModel, target_offsets_pm: np.ndarray,
                        drive_v: float, v_mid: float) -> np.ndarray:
    """Combiner-input field of one arm at a fixed drive, per detuning."""
    off_pm = (target_offsets_pm + _drive_shift_pm(model, drive_v)
              - _drive_shift_pm(model, v_mid))
    fsr = fsr_nm(model.radius_um, model.group_index, model.design_wavelength_nm)
    theta = 2.0 * math.pi * off_pm * 1.0e-3 / fsr
    h = ring_field_response(model.self_coupling, model.round_trip_amplitude,
                            theta)
    return np.asarray(h) / math.sqrt(2.0)


def _wrap(phase: np.ndarray) -> np.ndarray:
    return (phase + np.pi) % (2.0 * math.pi) - np.pi


def detuning_phase_surface(template: RamziConfig, spec: SweepSpec | None = None):
    """Objective ingredients over the (detuning, phi_ps) grid.

    Returns ``(deltas, phis, oma_e, offset, feasible)``.  ``oma_e`` and
    ``offset`` have shape (len(deltas), len(phis)); ``feasible`` is a
    per-grid-point mask combining the equal-amplitude / opposite-phase
    requirement at both drive extremes with heater realizability (both
    constraints depend only on the detuning row).
    """
    spec = spec if spec is not None else SweepSpec()
    deltas = _delta_grid(spec)
    phis = _phi_grid(spec)
    v_lo, v_hi_v = spec.drive_min_v, spec.drive_max_v
    v_mid = spec.v_mid

    # hi state drives (min, max); lo state drives (max, min)
    e_t_hi = _arm_extreme_fields(template.mrm_top, -deltas, v_lo, v_mid)
    e_b_hi = _arm_extreme_fields(template.mrm_bottom, +deltas, v_hi_v, v_mid)
    e_t_lo = _arm_extreme_fields(template.mrm_top, -deltas, v_hi_v, v_mid)
    e_b_lo = _arm_extreme_fields(template.mrm_bottom, +deltas, v_lo, v_mid)

    rot = np.exp(-1j * phis)[None, :]
    e_hi = (e_t_hi[:, None] + e_b_hi[:, None] * rot) / math.sqrt(2.0)
    e_lo = (e_t_lo[:, None] + e_b_lo[:, None] * rot) / math.sqrt(2.0)
    oma = np.abs(e_hi) - np.abs(e_lo)

    axis = np.exp(1j * phis / 2.0)[None, :]
    s_hi = np.real(e_hi * axis)
    s_lo = np.real(e_lo * axis)
    offset = 0.5 * np.abs(s_hi + s_lo)

    amp_ok = np.ones(deltas.shape, dtype=bool)
    phase_ok = np.ones(deltas.shape, dtype=bool)
    for e_t, e_b in ((e_t_hi, e_b_hi), (e_t_lo, e_b_lo)):
        amp_ok &= np.abs(np.abs(e_t) - np.abs(e_b)) <= spec.amplitude_tolerance
        phase_ok &= (np.abs(_wrap(np.angle(e_t) + np.angle(e_b)))
                     <= math.radians(spec.phase_tolerance_deg))
    heater_ok = np.ones(deltas.shape, dtype=bool)
    for model, sign in ((template.mrm_top, -1.0), (template.mrm_bottom, +1.0)):
        powers = np.array([
            heater_power_for_offset_mw(model, template.laser_wavelength_nm,
                                       sign * d, v_mid) for d in deltas])
        heater_ok &= powers >= 0.0

    feasible = (amp_ok & phase_ok & heater_ok)[:, None] & np.ones(
        (1, phis.size), dtype=bool)
    return deltas, phis, oma, offset, feasible


def _objective_surface(spec: SweepSpec, oma: np.ndarray,
                       offset: np.ndarray) -> np.ndarray:
    if spec.objective == "max_oma":
        return oma
    if spec.objective == "target_offset":
        return -np.abs(offset - spec.target_offset)
    return oma - spec.offset_weight * np.abs(offset - spec.target_offset)


def _nearest_miss_message(spec: SweepSpec, template: RamziConfig,
                          deltas: np.ndarray) -> str:
    v_mid = spec.v_mid
    best_amp = (math.inf, math.nan)
    best_phase = (math.inf, math.nan)
    for d in deltas:
        amp_worst = 0.0
        phase_worst = 0.0
        for v_t, v_b in ((spec.drive_min_v, spec.drive_max_v),
                         (spec.drive_max_v, spec.drive_min_v)):
            e_t = complex(_arm_extreme_fields(template.mrm_top,
                                              np.array([-d]), v_t, v_mid)[0])
            e_b = complex(_arm_extreme_fields(template.mrm_bottom,
                                              np.array([+d]), v_b, v_mid)[0])
            amp_worst = max(amp_worst, abs(abs(e_t) - abs(e_b)))
            phase_sum = float(_wrap(np.array([np.angle(e_t) + np.angle(e_b)]))[0])
            phase_worst = max(phase_worst, abs(phase_sum))
        if amp_worst < best_amp[0]:
            best_amp = (amp_worst, d)
        if phase_worst < best_phase[0]:
            best_phase = (phase_worst, d)
    return (
        "no feasible bias point on the grid; nearest misses: "
        f"arm-amplitude mismatch {best_amp[0]:.4f} at detuning "
        f"{best_amp[1]:g} pm (tolerance {spec.amplitude_tolerance}), "
        f"arm-phase sum {math.degrees(best_phase[0]):.2f} deg at detuning "
        f"{best_phase[1]:g} pm (tolerance {spec.phase_tolerance_deg} deg)")


def tune_static(template: RamziConfig, spec: SweepSpec | None = None,
                n_levels: int = 4) -> BiasSolution:
    """Grid-search the static bias point and build its drive table.

    ``template`` supplies the ring models and laser wavelength; its
    phase, detuning and heater fields are ignored and replaced by the
    tuned values in the returned solution.
    """
    spec = spec if spec is not None else SweepSpec()
    deltas, phis, oma, offset, feasible = detuning_phase_surface(template, spec)
    if spec.objective == "max_oma":
        feasible = feasible & (deltas != 0.0)[:, None]

    obj = np.where(feasible, _objective_surface(spec, oma, offset), -np.inf)
    best = float(np.max(obj))
    if not math.isfinite(best):
        raise InfeasibleBiasError(_nearest_miss_message(spec, template, deltas))

    candidates = np.argwhere(obj == best)
    def _tie_key(idx):
        i, j = int(idx[0]), int(idx[1])
        phi = float(phis[j])
        return (float(deltas[i]), min(phi, 2.0 * math.pi - phi), phi)
    i_best, j_best = min(candidates, key=_tie_key)
    delta = float(deltas[int(i_best)])
    phi_ps = float(phis[int(j_best)])

    heater_top = heater_power_for_offset_mw(
        template.mrm_top, template.laser_wavelength_nm, -delta, spec.v_mid)
    heater_bottom = heater_power_for_offset_mw(
        template.mrm_bottom, template.laser_wavelength_nm, +delta, spec.v_mid)
    config = RamziConfig(
        mrm_top=template.mrm_top, mrm_bottom=template.mrm_bottom,
        phi_ps=phi_ps, detuning_offset_pm=delta,
        laser_wavelength_nm=template.laser_wavelength_nm,
        heater_top_mw=heater_top, heater_bottom_mw=heater_bottom)

    table = find_drive_levels(config, spec, n_levels)
    issues = validate_drive_table(
        config, table, spacing_tolerance=spec.spacing_tolerance,
        amplitude_tolerance=spec.amplitude_tolerance,
        phase_tolerance_deg=spec.phase_tolerance_deg)
    if issues:
        raise InfeasibleBiasError(
            "tuned drive table failed validation: " + "; ".join(issues))

    hi = (spec.drive_min_v, spec.drive_max_v)
    lo = (spec.drive_max_v, spec.drive_min_v)
    achieved_oma = ramzi_oma_e(config, hi, lo)
    return BiasSolution(
        heater_top_mw=heater_top, heater_bottom_mw=heater_bottom,
        phi_ps=phi_ps, detuning_offset_pm=delta, drive_table=table,
        achieved_oma_e=achieved_oma,
        achieved_phase_error_deg=phase_spread_deg(config, table),
        objective_value=best, config=config)


def find_drive_levels(config: RamziConfig, spec: SweepSpec | None = None,
                      n_levels: int = 4) -> DriveLevelTable:
    """Solve drive pairs on the push-pull manifold for even field levels.

    The manifold constraint ``v_top + v_bottom = drive_min + drive_max``
    enforces the equal-amplitude, opposite-phase arm condition exactly
    for twin rings; the remaining one-dimensional search roots the
    signed level against each evenly spaced target.  ``n_levels == 2``
    returns exactly the two drive extremes.  If a target cannot be
    bracketed the nearest scanned point is used and the table is
    returned with a spacing-residual warning.
    """
    spec = spec if spec is not None else SweepSpec()
    if n_levels < 2:
        raise ValueError("n_levels must be at least 2")
    v_sum = spec.drive_min_v + spec.drive_max_v
    grid = np.linspace(spec.drive_min_v, spec.drive_max_v, spec.voltage_points)
    raw = np.array([signed_level(config, v, v_sum - v) for v in grid])

    s_hi = raw[0]      # drives (min, max)
    s_lo = raw[-1]     # drives (max, min)
    sign = -1.0 if (s_hi + s_lo) < 0.0 else 1.0
    corrected = sign * raw
    c_lo, c_hi = corrected[-1], corrected[0]

    targets = np.linspace(c_lo, c_hi, n_levels)
    entries = []
    bracketing_failed = False
    for k, target in enumerate(targets):
        if k == 0:
            entries.append(DriveLevelEntry(spec.drive_max_v, spec.drive_min_v,
                                           c_lo))
            continue
        if k == n_levels - 1:
            entries.append(DriveLevelEntry(spec.drive_min_v, spec.drive_max_v,
                                           c_hi))
            continue
        v_star = None
        # scan from the lo-state end toward the hi-state end and root
        # the first bracketing interval
        for idx in range(len(grid) - 1, 0, -1):
            f_right = corrected[idx] - target
            f_left = corrected[idx - 1] - target
            if f_right == 0.0:
                v_star = float(grid[idx])
                break
            if f_left * f_right < 0.0:
                v_star = float(brentq(
                    lambda v: sign * signed_level(config, v, v_sum - v) - target,
                    float(grid[idx - 1]), float(grid[idx]), xtol=1e-12))
                break
        if v_star is None:
            bracketing_failed = True
            v_star = float(grid[int(np.argmin(np.abs(corrected - target)))])
        level = sign * signed_level(config, v_star, v_sum - v_star)
        entries.append(DriveLevelEntry(v_star, v_sum - v_star, level))

    entries.sort(key=lambda e: e.field_level)
    levels = np.array([e.field_level for e in entries])
    if n_levels > 2:
        gaps = np.diff(levels)
        swing = abs(levels[-1] - levels[0])
        residual = float(np.max(np.abs(gaps - np.mean(gaps))))
        if swing > 0.0 and residual > spec.spacing_tolerance * swing:
            warnings.warn(
                f"even spacing unreachable: worst residual {residual:.4g} "
                f"against a swing of {swing:.4g}"
                + (" (bracketing failed)" if bracketing_failed else ""),
                SpacingResidualWarning, stacklevel=2)
    return DriveLevelTable(entries=tuple(entries), projection_sign=sign)


def retune_at_power(solution: BiasSolution, optical_power_dbm: float, *,
                    drive_rate_hz: float = DEFAULT_DRIVE_RATE_HZ,
                    settle_taus: float = 30.0,
                    resonance_tolerance_pm: float = 0.2,
                    t_ambient_k: float = DEFAULT_AMBIENT_K) -> BiasSolution:
    """Re-solve the heater powers once real optical power flows.

    ``optical_power_dbm`` is the power entering each MRM.  The static
    solution fixes a target temperature per ring; under light the
    dither-averaged absorbed power heats the ring on its own, so the
    heater must hand exactly that much back:

        P_heater = P_static - P_absorbed(T_target)

    with the absorption averaged over a 50/50 dither between the extreme
    table drives at ``drive_rate_hz`` (far above 1/tau, so the ring only
    sees the mean).  The solve is closed-form because the target
    temperature is known; it is then verified by settling the full
    dither dynamics from the target and checking that the time-averaged
    resonance stays within ``resonance_tolerance_pm`` of it.

    The returned solution carries the physical heater settings while its
    ``config`` keeps the equivalent zero-light placement (identical
    optical response), so the drive table and achieved metrics carry
    over unchanged.

    Raises ThermalInstabilityError when the bias cannot be held: the
    self-heating loop gain reaches 1 at the target (the operating point
    is swallowed by the fold; sweep_and_diagnose at this power shows the
    hysteresis), the compensated heater power would go negative, or the
    settled average misses the target.
    """
    config = solution.config
    v_tops = [e.v_top for e in solution.drive_table.entries]
    v_bottoms = [e.v_bottom for e in solution.drive_table.entries]
    rings = (
        ("top", config.mrm_top, config.heater_top_mw,
         (max(v_tops), min(v_tops))),
        ("bottom", config.mrm_bottom, config.heater_bottom_mw,
         (max(v_bottoms), min(v_bottoms))),
    )
    retuned: dict[str, float] = {}
    for name, model, h_static, levels in rings:
        t_target = zero_light_steady_temperature_k(model, h_static,
                                                   t_ambient_k)
        gain = local_loop_gain(model, optical_power_dbm, t_target, levels,
                               config.laser_wavelength_nm, t_ambient_k)
        if gain >= 1.0:
            raise ThermalInstabilityError(
                f"{name} MRM bias is unreachable at {optical_power_dbm:g} "
                f"dBm: self-heating loop gain {gain:.3f} >= 1 at the target "
                "temperature, so the operating point lies on the unstable "
                "branch; run sweep_and_diagnose at this power for the "
                "hysteresis picture")
        absorbed = dither_absorbed_power_mw(
            model, optical_power_dbm, t_target, levels,
            config.laser_wavelength_nm, t_ambient_k)
        h_new = h_static - absorbed
        if h_new < 0.0:
            raise ThermalInstabilityError(
                f"{name} MRM absorbs {absorbed:.3f} mW at "
                f"{optical_power_dbm:g} dBm, more than the {h_static:.3f} mW "
                "static heater budget; the bias target cannot be held")
        t_settled = settled_dither_temperature_k(
            model, optical_power_dbm, h_new, drive_rate_hz, settle_taus,
            levels, config.laser_wavelength_nm, t_ambient_k,
            initial_temperature_k=t_target)
        pm_per_k = (model.thermal_shift_coefficient_pm_per_mw
                    / model.thermal_resistance_k_per_mw)
        residual_pm = abs(t_settled - t_target) * pm_per_k
        if residual_pm > resonance_tolerance_pm:
            raise ThermalInstabilityError(
                f"{name} MRM drifts {residual_pm:.3f} pm from the bias "
                f"target at {optical_power_dbm:g} dBm (tolerance "
                f"{resonance_tolerance_pm:g} pm); the dither average does "
                "not hold the static placement")
        retuned[name] = h_new
    return replace(solution, heater_top_mw=retuned["top"],
                   heater_bottom_mw=retuned["bottom"])
