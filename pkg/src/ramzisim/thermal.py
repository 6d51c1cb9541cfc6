"""First-order opto-thermal dynamics for a single microring.

The state is the ring temperature T.  Heater power and absorbed optical
power drive it through

    (tau / R_th) * dT/dt = P_heater + P_absorbed - (T - T_amb) / R_th

with P_absorbed = absorbed_fraction * P_in * (1 - |H|^2) and the ring
response evaluated at the instantaneous temperature and drive voltage.
The resonance moves with temperature at thermal_shift_coefficient /
thermal_resistance pm per kelvin, which makes the zero-light steady
state coincide exactly with the quasi-static heater model used by the
device layer.  Note that the thermal resistance cancels out of the
steady-state feedback loop: absorbed milliwatts shift the resonance
through the same pm/mW coefficient as heater milliwatts, so the loop
gain is set by absorbed_fraction * thermal_shift_coefficient alone.

Sweeps are stepped-settle: each heater point is held for a fixed number
of thermal time constants (default 25) while the drive dithers between
the two extreme levels, and the transmission is recorded per drive
state as the mean field magnitude over the last full dither period.
Holding to settle keeps the up and down traces free of lag-induced
false hysteresis; a continuous 50 ms ramp over the full range would be
far too fast for a 1 ms time constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .devices import MrmModel, fsr_nm
from .errors import ThermalInstabilityError

DEFAULT_AMBIENT_K = 300.0
DEFAULT_SWEEP_STEPS = 1024
DEFAULT_SETTLE_TAUS = 25.0
DEFAULT_DRIVE_RATE_HZ = 2.0e6
DEFAULT_DRIVE_LEVELS = (0.0, -4.0)
GAP_THRESHOLD_FRACTION = 0.01
JUMP_THRESHOLD_FRACTION = 0.05


@dataclass(frozen=True)
class ThermalTimeSeries:
    time_s: np.ndarray
    temperature_k: np.ndarray
    transmission: np.ndarray


@dataclass(frozen=True)
class ThermalTrace:
    """One sweep direction: settled transmission per heater power."""

    heater_powers_mw: np.ndarray
    transmission_v0: np.ndarray
    transmission_v4: np.ndarray
    direction: str
    input_power_dbm: float

    def __post_init__(self) -> None:
        if self.direction not in ("up", "down"):
            raise ValueError("direction must be 'up' or 'down'")
        diffs = np.diff(self.heater_powers_mw)
        if self.direction == "up" and not np.all(diffs > 0.0):
            raise ValueError("up trace heater powers must be strictly increasing")
        if self.direction == "down" and not np.all(diffs < 0.0):
            raise ValueError("down trace heater powers must be strictly decreasing")


@dataclass(frozen=True)
class StabilityReport:
    bistable: bool
    max_hysteresis_gap: float
    metastable: bool
    max_jump: float
    transmission_swing: float
    gap_threshold: float
    jump_threshold: float


def _ring_params(model: MrmModel, laser_wavelength_nm: float | None):
    lam = (model.design_wavelength_nm if laser_wavelength_nm is None
           else laser_wavelength_nm)
    fsr = fsr_nm(model.radius_um, model.group_index, model.design_wavelength_nm)
    pm_per_k = (model.thermal_shift_coefficient_pm_per_mw
                / model.thermal_resistance_k_per_mw)
    return (model.self_coupling, model.round_trip_amplitude,
            model.resonance_wavelength_at_rest_nm,
            model.modulation_efficiency_pm_per_v,
            model.modulation_efficiency_quadratic_pm_per_v2,
            pm_per_k, model.thermal_resistance_k_per_mw,
            model.thermal_time_constant_s, model.absorbed_fraction,
            lam, fsr)


@njit(cache=True)
def _integrate_kernel(heater_mw, drive_v, dt, p_in_mw, t0, t_amb,
                      t_c, a_c, rest_nm, eff, quad, pm_per_k, r_th, tau,
                      f_abs, lam_nm, fsr):
    n = heater_mw.shape[0]
    temps = np.empty(n)
    trans = np.empty(n)
    two_pi_over_fsr_pm = 2.0 * math.pi / (fsr * 1.0e3)
    temp = t0
    comp = 0.0  # Kahan carry; bare += stalls ~1e-10 K short of steady state
    for i in range(n):
        v = drive_v[i]
        off_pm = ((rest_nm - lam_nm) * 1.0e3 + eff * v + quad * v * v
                  + (temp - t_amb) * pm_per_k)
        theta = two_pi_over_fsr_pm * off_pm
        ct = math.cos(theta)
        num = t_c * t_c + a_c * a_c - 2.0 * t_c * a_c * ct
        den = 1.0 + t_c * t_c * a_c * a_c - 2.0 * t_c * a_c * ct
        h2 = num / den
        temps[i] = temp
        trans[i] = math.sqrt(h2)
        p_abs = f_abs * p_in_mw * (1.0 - h2)
        incr = dt * (r_th * (heater_mw[i] + p_abs) - (temp - t_amb)) / tau - comp
        new_temp = temp + incr
        comp = (new_temp - temp) - incr
        temp = new_temp
        if not math.isfinite(temp):
            return temps, trans, i
    return temps, trans, -1


@njit(cache=True)
def _dither_sweep_kernel(heater_steps_mw, p_in_mw, v_hi, v_lo, per_half,
                         hold_steps, dt, t0, t_amb,
                         t_c, a_c, rest_nm, eff, quad, pm_per_k, r_th, tau,
                         f_abs, lam_nm, fsr):
    n = heater_steps_mw.shape[0]
    tr_hi = np.empty(n)
    tr_lo = np.empty(n)
    t_avg = np.empty(n)
    two_pi_over_fsr_pm = 2.0 * math.pi / (fsr * 1.0e3)
    period = 2 * per_half
    rec_start = hold_steps - period
    temp = t0
    comp = 0.0
    for i in range(n):
        ph = heater_steps_mw[i]
        acc_hi = 0.0
        acc_lo = 0.0
        acc_t = 0.0
        n_hi = 0
        n_lo = 0
        for k in range(hold_steps):
            hi_state = ((k // per_half) % 2) == 0
            v = v_hi if hi_state else v_lo
            off_pm = ((rest_nm - lam_nm) * 1.0e3 + eff * v + quad * v * v
                      + (temp - t_amb) * pm_per_k)
            theta = two_pi_over_fsr_pm * off_pm
            ct = math.cos(theta)
            num = t_c * t_c + a_c * a_c - 2.0 * t_c * a_c * ct
            den = 1.0 + t_c * t_c * a_c * a_c - 2.0 * t_c * a_c * ct
            h2 = num / den
            if k >= rec_start:
                hmag = math.sqrt(h2)
                acc_t += temp
                if hi_state:
                    acc_hi += hmag
                    n_hi += 1
                else:
                    acc_lo += hmag
                    n_lo += 1
            p_abs = f_abs * p_in_mw * (1.0 - h2)
            incr = dt * (r_th * (ph + p_abs) - (temp - t_amb)) / tau - comp
            new_temp = temp + incr
            comp = (new_temp - temp) - incr
            temp = new_temp
            if not math.isfinite(temp):
                return tr_hi, tr_lo, t_avg, i
        tr_hi[i] = acc_hi / n_hi
        tr_lo[i] = acc_lo / n_lo
        t_avg[i] = acc_t / period
    return tr_hi, tr_lo, t_avg, -1


def input_power_mw(input_power_dbm: float) -> float:
    """dBm to mW; -inf dBm means dark."""
    return 10.0 ** (input_power_dbm / 10.0)


def integrate_thermal(model: MrmModel, input_power_dbm: float,
                      heater_schedule_mw, drive_schedule_v, dt_s: float,
                      *, laser_wavelength_nm: float | None = None,
                      t_ambient_k: float = DEFAULT_AMBIENT_K,
                      initial_temperature_k: float | None = None
                      ) -> ThermalTimeSeries:
    """Explicit-Euler integration of the opto-thermal state.

    The schedules give heater power and drive voltage per step, held
    constant across each dt.  The returned series sample the state at
    the start of each step, so ``temperature_k[i]`` and
    ``transmission[i]`` correspond to the same instant as the schedule
    inputs of step i.
    """
    heater = np.ascontiguousarray(heater_schedule_mw, dtype=float)
    drive = np.ascontiguousarray(drive_schedule_v, dtype=float)
    if heater.shape != drive.shape or heater.ndim != 1 or heater.size == 0:
        raise ValueError("heater and drive schedules must be equal-length 1-D")
    if dt_s <= 0.0:
        raise ValueError("dt_s must be positive")
    if dt_s > model.thermal_time_constant_s / 50.0:
        raise ValueError(
            f"dt_s = {dt_s:g} s too coarse; need <= tau/50 = "
            f"{model.thermal_time_constant_s / 50.0:g} s")
    t0 = t_ambient_k if initial_temperature_k is None else initial_temperature_k
    params = _ring_params(model, laser_wavelength_nm)
    temps, trans, bad = _integrate_kernel(
        heater, drive, dt_s, input_power_mw(input_power_dbm), t0,
        t_ambient_k, *params)
    if bad >= 0:
        raise ThermalInstabilityError(
            f"non-finite temperature at step {bad} of {heater.size}; "
            "integration aborted")
    time_s = dt_s * np.arange(heater.size)
    return ThermalTimeSeries(time_s=time_s, temperature_k=temps,
                             transmission=trans)


def _sweep_one_direction(model: MrmModel, input_power_dbm: float,
                         powers_mw: np.ndarray, direction: str,
                         drive_rate_hz: float, settle_taus: float,
                         drive_levels: tuple[float, float],
                         laser_wavelength_nm: float | None,
                         t_ambient_k: float):
    tau = model.thermal_time_constant_s
    dt = min(tau / 100.0, 1.0 / (10.0 * drive_rate_hz))
    per_half = max(1, int(round(0.5 / drive_rate_hz / dt)))
    hold_steps = int(round(settle_taus * tau / dt))
    if hold_steps < 2 * per_half:
        raise ValueError("hold too short to record one full dither period")
    t0 = t_ambient_k + model.thermal_resistance_k_per_mw * powers_mw[0]
    params = _ring_params(model, laser_wavelength_nm)
    tr_hi, tr_lo, t_avg, bad = _dither_sweep_kernel(
        np.ascontiguousarray(powers_mw, dtype=float),
        input_power_mw(input_power_dbm), drive_levels[0], drive_levels[1],
        per_half, hold_steps, dt, t0, t_ambient_k, *params)
    if bad >= 0:
        raise ThermalInstabilityError(
            f"non-finite temperature during {direction} sweep at heater step "
            f"{bad} ({powers_mw[bad]:.4f} mW)")
    trace = ThermalTrace(heater_powers_mw=powers_mw, transmission_v0=tr_hi,
                         transmission_v4=tr_lo, direction=direction,
                         input_power_dbm=input_power_dbm)
    return trace, t_avg


def sweep_and_diagnose(model: MrmModel, input_power_dbm: float,
                       p_min_mw: float = 21.0, p_max_mw: float = 23.5,
                       duration_s: float | None = None,
                       drive_rate_hz: float = DEFAULT_DRIVE_RATE_HZ,
                       *, n_steps: int = DEFAULT_SWEEP_STEPS,
                       settle_taus: float = DEFAULT_SETTLE_TAUS,
                       drive_levels: tuple[float, float] = DEFAULT_DRIVE_LEVELS,
                       laser_wavelength_nm: float | None = None,
                       t_ambient_k: float = DEFAULT_AMBIENT_K,
                       gap_threshold_fraction: float = GAP_THRESHOLD_FRACTION,
                       jump_threshold_fraction: float = JUMP_THRESHOLD_FRACTION,
                       ) -> tuple[ThermalTrace, ThermalTrace, StabilityReport]:
    """Bidirectional stepped-settle heater sweep with stability flags.

    ``duration_s`` sets the per-step hold as duration / n_steps and must
    allow at least 10 thermal time constants per step; when omitted the
    hold defaults to ``settle_taus`` time constants, which is what the
    50 ms nominal sweep of the measurement procedure needs once the
    settling requirement is taken seriously.

    Hysteresis gap is the worst |up - down| transmission difference at
    matching heater power per drive state; the jump metric is the worst
    adjacent-step transmission delta.  Both are compared against
    thresholds expressed as fractions of the full transmission swing.
    """
    if not p_min_mw < p_max_mw:
        raise ValueError("p_min_mw must be below p_max_mw")
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2")
    if drive_rate_hz * model.thermal_time_constant_s < 50.0:
        raise ValueError("drive dither must be much faster than 1/tau")
    if duration_s is not None:
        hold_taus = duration_s / n_steps / model.thermal_time_constant_s
        if hold_taus < 10.0:
            raise ValueError(
                f"duration_s gives {hold_taus:.2f} tau per step; need >= 10 "
                "for the traces to be settled")
        settle_taus = hold_taus

    powers = np.linspace(p_min_mw, p_max_mw, n_steps)
    up, _ = _sweep_one_direction(model, input_power_dbm, powers, "up",
                                 drive_rate_hz, settle_taus, drive_levels,
                                 laser_wavelength_nm, t_ambient_k)
    down, _ = _sweep_one_direction(model, input_power_dbm, powers[::-1].copy(),
                                   "down", drive_rate_hz, settle_taus,
                                   drive_levels, laser_wavelength_nm,
                                   t_ambient_k)

    d_v0 = down.transmission_v0[::-1]
    d_v4 = down.transmission_v4[::-1]
    stacked = np.concatenate([up.transmission_v0, up.transmission_v4,
                              d_v0, d_v4])
    swing = float(stacked.max() - stacked.min())
    gap = float(max(np.max(np.abs(up.transmission_v0 - d_v0)),
                    np.max(np.abs(up.transmission_v4 - d_v4))))
    jump = float(max(np.max(np.abs(np.diff(up.transmission_v0))),
                     np.max(np.abs(np.diff(up.transmission_v4))),
                     np.max(np.abs(np.diff(d_v0))),
                     np.max(np.abs(np.diff(d_v4)))))
    gap_threshold = gap_threshold_fraction * swing
    jump_threshold = jump_threshold_fraction * swing
    report = StabilityReport(
        bistable=bool(swing > 0.0 and gap > gap_threshold),
        max_hysteresis_gap=gap,
        metastable=bool(swing > 0.0 and jump > jump_threshold),
        max_jump=jump, transmission_swing=swing,
        gap_threshold=gap_threshold, jump_threshold=jump_threshold)
    return up, down, report


def is_unstable(report: StabilityReport) -> bool:
    return report.bistable or report.metastable


def instability_onset(model: MrmModel, p_lo_dbm: float = -20.0,
                      p_hi_dbm: float = 5.0, iterations: int = 11,
                      **sweep_kwargs) -> float | None:
    """Bisect the input power at which the sweep diagnosis turns unstable.

    Returns None when the diagnosis is already stable at ``p_hi_dbm``.
    Relies on destabilization being monotone in input power.
    """
    _, _, hi_report = sweep_and_diagnose(model, p_hi_dbm, **sweep_kwargs)
    if not is_unstable(hi_report):
        return None
    lo, hi = p_lo_dbm, p_hi_dbm
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        _, _, report = sweep_and_diagnose(model, mid, **sweep_kwargs)
        if is_unstable(report):
            hi = mid
        else:
            lo = mid
    return hi


def zero_light_steady_temperature_k(model: MrmModel, heater_mw: float,
                                    t_ambient_k: float = DEFAULT_AMBIENT_K
                                    ) -> float:
    return t_ambient_k + model.thermal_resistance_k_per_mw * heater_mw


def _transmission_sq_at(model: MrmModel, temperature_k: float, drive_v: float,
                        laser_wavelength_nm: float | None,
                        t_ambient_k: float) -> float:
    (t_c, a_c, rest_nm, eff, quad, pm_per_k, _r, _tau, _f,
     lam, fsr) = _ring_params(model, laser_wavelength_nm)
    off_pm = ((rest_nm - lam) * 1.0e3 + eff * drive_v + quad * drive_v**2
              + (temperature_k - t_ambient_k) * pm_per_k)
    theta = 2.0 * math.pi * off_pm / (fsr * 1.0e3)
    ct = math.cos(theta)
    num = t_c * t_c + a_c * a_c - 2.0 * t_c * a_c * ct
    den = 1.0 + t_c * t_c * a_c * a_c - 2.0 * t_c * a_c * ct
    return num / den


def dither_absorbed_power_mw(model: MrmModel, input_power_dbm: float,
                             temperature_k: float,
                             drive_levels: tuple[float, float] = DEFAULT_DRIVE_LEVELS,
                             laser_wavelength_nm: float | None = None,
                             t_ambient_k: float = DEFAULT_AMBIENT_K) -> float:
    """Dither-averaged absorbed optical power at a fixed temperature."""
    h2 = [_transmission_sq_at(model, temperature_k, v, laser_wavelength_nm,
                              t_ambient_k) for v in drive_levels]
    p_in = input_power_mw(input_power_dbm)
    return model.absorbed_fraction * p_in * (1.0 - float(np.mean(h2)))


def local_loop_gain(model: MrmModel, input_power_dbm: float,
                    temperature_k: float,
                    drive_levels: tuple[float, float] = DEFAULT_DRIVE_LEVELS,
                    laser_wavelength_nm: float | None = None,
                    t_ambient_k: float = DEFAULT_AMBIENT_K) -> float:
    """Self-heating feedback gain of the steady state at the given point.

    This is d(absorbed resonance shift)/d(resonance shift), dither
    averaged over the drive levels.  Fixed points with gain >= 1 are
    unstable; the thermal resistance cancels out (see module docstring).
    """
    (t_c, a_c, rest_nm, eff, quad, pm_per_k, _r, _tau, f_abs,
     lam, fsr) = _ring_params(model, laser_wavelength_nm)
    coeff = model.thermal_shift_coefficient_pm_per_mw
    p_in = input_power_mw(input_power_dbm)
    slopes = []
    for v in drive_levels:
        off_pm = ((rest_nm - lam) * 1.0e3 + eff * v + quad * v * v
                  + (temperature_k - t_ambient_k) * pm_per_k)
        theta = 2.0 * math.pi * off_pm / (fsr * 1.0e3)
        den = (1.0 + t_c * t_c * a_c * a_c
               - 2.0 * t_c * a_c * math.cos(theta))
        # 1 - |H|^2 = (1-t^2)(1-a^2)/den, so its theta-derivative carries
        # a minus sign: warming toward resonance raises absorption.
        d_absorption_dtheta = (-2.0 * t_c * a_c * math.sin(theta)
                               * (1.0 - t_c * t_c) * (1.0 - a_c * a_c)
                               / den**2)
        slopes.append(d_absorption_dtheta)
    dtheta_dpm = 2.0 * math.pi / (fsr * 1.0e3)
    return coeff * f_abs * p_in * float(np.mean(slopes)) * dtheta_dpm


def settled_dither_temperature_k(model: MrmModel, input_power_dbm: float,
                                 heater_mw: float,
                                 drive_rate_hz: float = DEFAULT_DRIVE_RATE_HZ,
                                 settle_taus: float = 30.0,
                                 drive_levels: tuple[float, float] = DEFAULT_DRIVE_LEVELS,
                                 laser_wavelength_nm: float | None = None,
                                 t_ambient_k: float = DEFAULT_AMBIENT_K,
                                 initial_temperature_k: float | None = None
                                 ) -> float:
    """Time-averaged temperature after settling at one heater power.

    The average runs over the last full dither period.  Divergence from
    an unstable seed shows up as a large offset from the seed value.
    """
    tau = model.thermal_time_constant_s
    dt = min(tau / 100.0, 1.0 / (10.0 * drive_rate_hz))
    per_half = max(1, int(round(0.5 / drive_rate_hz / dt)))
    hold_steps = int(round(settle_taus * tau / dt))
    t0 = (zero_light_steady_temperature_k(model, heater_mw, t_ambient_k)
          if initial_temperature_k is None else initial_temperature_k)
    params = _ring_params(model, laser_wavelength_nm)
    _hi, _lo, t_avg, bad = _dither_sweep_kernel(
        np.array([heater_mw], dtype=float), input_power_mw(input_power_dbm),
        drive_levels[0], drive_levels[1], per_half, hold_steps, dt, t0,
        t_ambient_k, *params)
    if bad >= 0:
        raise ThermalInstabilityError(
            f"non-finite temperature while settling at {heater_mw:.4f} mW")
    return float(t_avg[0])
