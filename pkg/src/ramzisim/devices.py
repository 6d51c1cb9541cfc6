"""Quasi-static complex-field device models.

The microring is the standard all-pass resonator

    H(theta) = (t - a * e^{i theta}) / (1 - t * a * e^{i theta})

with self-coupling ``t`` and round-trip field amplitude ``a``.  The
round-trip detuning phase is linearized about the design wavelength:
``theta = 2*pi*(lambda_res - lambda)/FSR`` with the free spectral range
evaluated once at the design wavelength.  The model is therefore valid in
a narrow band around one resonance (the response repeats with FSR
periodicity through ``e^{i theta}``, so probing far away returns the
nearest resonance replica rather than garbage).

Resonance position is affine in drive voltage and heater power.  A
positive modulation efficiency (pm/V) with negative reverse-bias voltages
moves the resonance to shorter wavelengths; heater power always moves it
to longer wavelengths.

The linewidth convention throughout is full width at half depth of the
transmission dip, i.e. the width where |H|^2 crosses the midpoint between
its on-resonance minimum and far-from-resonance maximum.  For the all-pass
form this width depends only on the product ``t*a``:

    cos(theta_half) = 2*t*a / (1 + (t*a)^2)

which gives the closed-form calibration used by :func:`calibrate_mrm`.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import CalibrationError

# Silicon thermo-optic resonance sensitivity near 1310 nm:
# d(lambda)/dT = lambda * (dn/dT) / n_g with dn/dT = 1.86e-4 / K, n_g = 4.2.
SILICON_RESONANCE_SHIFT_PM_PER_K = 58.01


@dataclass(frozen=True)
class ComplexAmplitude:
    """Normalized optical field, unit-referenced to the circuit input."""

    re: float
    im: float

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexAmplitude":
        return cls(float(z.real), float(z.imag))

    @classmethod
    def from_polar(cls, magnitude: float, phase: float) -> "ComplexAmplitude":
        return cls(magnitude * math.cos(phase), magnitude * math.sin(phase))

    def as_complex(self) -> complex:
        return complex(self.re, self.im)

    @property
    def magnitude(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def phase(self) -> float:
        """Argument in (-pi, pi]; callers needing continuity across a
        constellation should reference phases to one nominal point."""
        return math.atan2(self.im, self.re)


@dataclass(frozen=True)
class MrmModel:
    """All physical parameters of one microring modulator.

    Units are embedded in the field names.  ``self_coupling`` (t) and
    ``round_trip_amplitude`` (a) are field coefficients in (0, 1).
    """

    radius_um: float
    q_factor: float
    self_coupling: float
    round_trip_amplitude: float
    resonance_wavelength_at_rest_nm: float
    modulation_efficiency_pm_per_v: float
    thermal_shift_coefficient_pm_per_mw: float
    thermal_resistance_k_per_mw: float
    thermal_time_constant_s: float
    absorbed_fraction: float
    group_index: float = 4.2
    design_wavelength_nm: float = 1310.0
    modulation_efficiency_quadratic_pm_per_v2: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.self_coupling < 1.0):
            raise ValueError(
                f"self_coupling must lie in (0, 1), got {self.self_coupling}")
        if not (0.0 < self.round_trip_amplitude < 1.0):
            raise ValueError(
                f"round_trip_amplitude must lie in (0, 1), got {self.round_trip_amplitude}")
        if self.radius_um <= 0.0 or self.q_factor <= 0.0:
            raise ValueError("radius_um and q_factor must be positive")
        if not (0.0 <= self.absorbed_fraction <= 1.0):
            raise ValueError("absorbed_fraction must lie in [0, 1]")
        if self.thermal_time_constant_s <= 0.0 or self.thermal_resistance_k_per_mw <= 0.0:
            raise ValueError("thermal constants must be positive")

    def replace(self, **changes) -> "MrmModel":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class MzmModel:
    """Reference Mach-Zehnder modulator, fixed to the link-table entries."""

    effective_oma_e: float = 2.0
    effective_oma: float = 1.0
    insertion_loss_db: float = 4.0
    bandwidth_ghz: float = 100.0


def fsr_nm(radius_um: float, group_index: float, wavelength_nm: float) -> float:
    """Free spectral range lambda^2 / (n_g * L) of a ring of the given radius."""
    circumference_nm = 2.0 * math.pi * radius_um * 1.0e3
    return wavelength_nm**2 / (group_index * circumference_nm)


def ring_field_response(t: float, a: float, theta):
    """All-pass complex field response at round-trip detuning ``theta`` (rad).

    ``theta`` may be a scalar or ndarray; the return type follows.
    """
    if not (0.0 < t < 1.0 and 0.0 < a < 1.0):
        raise ValueError("coupling coefficients must lie in (0, 1)")
    phasor = np.exp(1j * np.asarray(theta, dtype=float))
    h = (t - a * phasor) / (1.0 - t * a * phasor)
    if np.ndim(theta) == 0:
        return complex(h)
    return h


def resonance_wavelength_nm(model: MrmModel, drive_voltage_v: float,
                            heater_power_mw: float) -> float:
    """Resonance position under drive and heater, affine by construction."""
    shift_pm = (model.modulation_efficiency_pm_per_v * drive_voltage_v
                + model.modulation_efficiency_quadratic_pm_per_v2 * drive_voltage_v**2
                + model.thermal_shift_coefficient_pm_per_mw * heater_power_mw)
    return model.resonance_wavelength_at_rest_nm + shift_pm / 1.0e3


def detuning_phase_rad(model: MrmModel, drive_voltage_v: float,
                       heater_power_mw: float, wavelength_nm):
    """Round-trip detuning phase 2*pi*(lambda_res - lambda)/FSR."""
    lam_res = resonance_wavelength_nm(model, drive_voltage_v, heater_power_mw)
    fsr = fsr_nm(model.radius_um, model.group_index, model.design_wavelength_nm)
    return 2.0 * math.pi * (lam_res - np.asarray(wavelength_nm, dtype=float)) / fsr


def mrm_field(model: MrmModel, drive_voltage_v, heater_power_mw,
              wavelength_nm):
    """Vectorized complex transfer; accepts array drive voltage or wavelength."""
    v = np.asarray(drive_voltage_v, dtype=float)
    shift_pm = (model.modulation_efficiency_pm_per_v * v
                + model.modulation_efficiency_quadratic_pm_per_v2 * v * v
                + model.thermal_shift_coefficient_pm_per_mw * heater_power_mw)
    lam_res = model.resonance_wavelength_at_rest_nm + shift_pm / 1.0e3
    fsr = fsr_nm(model.radius_um, model.group_index, model.design_wavelength_nm)
    theta = 2.0 * math.pi * (lam_res - np.asarray(wavelength_nm, dtype=float)) / fsr
    return ring_field_response(model.self_coupling, model.round_trip_amplitude,
                               theta)


def mrm_transfer(model: MrmModel, drive_voltage_v: float,
                 heater_power_mw: float, wavelength_nm: float) -> ComplexAmplitude:
    """Single-point transfer returning a :class:`ComplexAmplitude`.

    Rejects non-finite inputs; coupling-range violations are already
    impossible because :class:`MrmModel` validates on construction.
    """
    for name, value in (("drive_voltage_v", drive_voltage_v),
                        ("heater_power_mw", heater_power_mw),
                        ("wavelength_nm", wavelength_nm)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value}")
    theta = float(detuning_phase_rad(model, drive_voltage_v, heater_power_mw,
                                     wavelength_nm))
    return ComplexAmplitude.from_complex(
        ring_field_response(model.self_coupling, model.round_trip_amplitude,
                            theta))


def phase_shifter(field: ComplexAmplitude, phase: float) -> ComplexAmplitude:
    """Lossless phase shifter: magnitude preserved, phase advanced."""
    return ComplexAmplitude.from_complex(
        field.as_complex() * cmath.exp(1j * phase))


def split_field(field: ComplexAmplitude) -> tuple[ComplexAmplitude, ComplexAmplitude]:
    """Even 1x2 splitter: each output carries 1/sqrt(2) of the field."""
    z = field.as_complex() / math.sqrt(2.0)
    out = ComplexAmplitude.from_complex(z)
    return out, out


def combine_fields(top: ComplexAmplitude, bottom: ComplexAmplitude,
                   both_ports: bool = False):
    """Unitary 2x2 combiner.

    Returns the sum port (top + bottom)/sqrt(2); with ``both_ports`` also
    the difference port, so callers can check energy conservation.
    """
    s = (top.as_complex() + bottom.as_complex()) / math.sqrt(2.0)
    if not both_ports:
        return ComplexAmplitude.from_complex(s)
    d = (top.as_complex() - bottom.as_complex()) / math.sqrt(2.0)
    return ComplexAmplitude.from_complex(s), ComplexAmplitude.from_complex(d)


def half_depth_detuning_rad(t: float, a: float) -> float:
    """Half-depth half-width of the transmission dip in detuning phase.

    Exact for the all-pass form: cos(theta_half) = 2ta/(1 + (ta)^2).
    """
    p = t * a
    return math.acos(2.0 * p / (1.0 + p * p))


def measure_fwhm_nm(model: MrmModel, drive_voltage_v: float = 0.0,
                    heater_power_mw: float = 0.0) -> float:
    """Numerically measured full width at half depth, in nm.

    Bisects |H(lambda)|^2 against the half-depth level on both sides of
    the resonance; used as the calibration self-check.
    """
    lam0 = resonance_wavelength_nm(model, drive_voltage_v, heater_power_mw)
    fsr = fsr_nm(model.radius_um, model.group_index, model.design_wavelength_nm)

    def depth(lam: float) -> float:
        h = mrm_field(model, drive_voltage_v, heater_power_mw, lam)
        return abs(h) ** 2

    t_min = depth(lam0)
    t_max = depth(lam0 + 0.5 * fsr)
    half = 0.5 * (t_min + t_max)
    right = brentq(lambda lam: depth(lam) - half, lam0 + 1e-9, lam0 + 0.5 * fsr,
                   xtol=1e-12)
    left = brentq(lambda lam: depth(lam) - half, lam0 - 0.5 * fsr, lam0 - 1e-9,
                  xtol=1e-12)
    return right - left


def measured_q(model: MrmModel) -> float:
    """Loaded Q referenced to the design wavelength: lambda / FWHM."""
    return model.design_wavelength_nm / measure_fwhm_nm(model)


def calibrate_mrm(target_q: float,
                  target_efficiency_pm_per_v: float,
                  coupling_regime: str = "critical",
                  *,
                  radius_um: float = 7.5,
                  group_index: float = 4.2,
                  design_wavelength_nm: float = 1310.0,
                  regime_ratio: float = 1.05,
                  thermal_shift_coefficient_pm_per_mw: float = 1900.0,
                  thermal_time_constant_s: float = 1.0e-3,
                  absorbed_fraction: float = 0.375,
                  bias_heater_target_mw: float = 22.25) -> MrmModel:
    """Solve (t, a) so the ring's measured Q matches ``target_q``.

    The half-depth linewidth of the all-pass dip depends only on the
    product ``p = t*a``; inverting the closed form gives

        theta_half = pi * n_g * L / (Q * lambda)
        p = (1 - tan(theta_half/2)) / (1 + tan(theta_half/2))

    The regime then splits the product: ``t = a = sqrt(p)`` (critical),
    ``t = sqrt(p*r), a = sqrt(p/r)`` (under, t > a) or the mirror (over),
    with ``r = regime_ratio``.  Modulation efficiency is stated exactly as
    given.  The rest resonance is placed ``bias_heater_target_mw`` of
    heating below the design wavelength, so a tuned ring draws roughly
    that much static heater power.

    ``absorbed_fraction`` defaults to the value calibrated against the
    thermal-stability boundary: with the 1900 pm/mW heater coefficient,
    0.375 puts the diagnosed instability onset at about -4.7 dBm input,
    leaving -5 dBm stable.  The thermal resistance drops out of that
    feedback loop, so this is the one knob that moves the boundary.

    Raises :class:`CalibrationError` when no (t, a) pair in (0, 1)
    realizes the target in the requested regime.
    """
    if target_q <= 100.0:
        raise CalibrationError(
            f"target_q must exceed 100 (got {target_q}); the narrow-band "
            "ring model is meaningless at such low Q")
    if regime_ratio <= 1.0:
        raise CalibrationError(
            f"regime_ratio must exceed 1 (got {regime_ratio})")
    if coupling_regime not in ("under", "critical", "over"):
        raise CalibrationError(
            f"unknown coupling_regime {coupling_regime!r}; "
            "expected 'under', 'critical' or 'over'")

    circumference_nm = 2.0 * math.pi * radius_um * 1.0e3
    theta_half = (math.pi * group_index * circumference_nm
                  / (target_q * design_wavelength_nm))
    if theta_half >= 0.5 * math.pi:
        q_floor = (math.pi * group_index * circumference_nm
                   / (0.5 * math.pi * design_wavelength_nm))
        raise CalibrationError(
            f"target_q {target_q} is below the all-pass floor "
            f"(~{q_floor:.0f} for this geometry)")
    u = math.tan(0.5 * theta_half)
    product = (1.0 - u) / (1.0 + u)

    if coupling_regime == "critical":
        t = a = math.sqrt(product)
    elif coupling_regime == "under":
        t = math.sqrt(product * regime_ratio)
        a = math.sqrt(product / regime_ratio)
    else:
        t = math.sqrt(product / regime_ratio)
        a = math.sqrt(product * regime_ratio)

    if max(t, a) >= 1.0 - 1.0e-9:
        p_cap = (1.0 - 1.0e-9) ** 2 / regime_ratio
        u_cap = (1.0 - p_cap) / (1.0 + p_cap)
        q_cap = (math.pi * group_index * circumference_nm
                 / (2.0 * math.atan(u_cap) * design_wavelength_nm))
        raise CalibrationError(
            f"target_q {target_q} unreachable in the {coupling_regime} regime "
            f"at ratio {regime_ratio} (cap ~{q_cap:.0f}); lower the Q or the "
            "regime ratio")

    rest_nm = (design_wavelength_nm
               - bias_heater_target_mw * thermal_shift_coefficient_pm_per_mw / 1.0e3)
    model = MrmModel(
        radius_um=radius_um,
        q_factor=target_q,
        self_coupling=t,
        round_trip_amplitude=a,
        resonance_wavelength_at_rest_nm=rest_nm,
        modulation_efficiency_pm_per_v=target_efficiency_pm_per_v,
        thermal_shift_coefficient_pm_per_mw=thermal_shift_coefficient_pm_per_mw,
        thermal_resistance_k_per_mw=(thermal_shift_coefficient_pm_per_mw
                                     / SILICON_RESONANCE_SHIFT_PM_PER_K),
        thermal_time_constant_s=thermal_time_constant_s,
        absorbed_fraction=absorbed_fraction,
        group_index=group_index,
        design_wavelength_nm=design_wavelength_nm,
    )

    q_check = measured_q(model)
    if abs(q_check / target_q - 1.0) > 0.02:
        raise CalibrationError(
            f"calibration self-check failed: measured Q {q_check:.1f} vs "
            f"target {target_q:.1f}")
    return model
