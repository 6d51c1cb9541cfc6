"""RAMZI circuit algebra: superposition of the two ring arms.

Every quantity here is computed by direct complex arithmetic on the arm
fields,

    E_out = (E_top + E_bottom * e^{-i phi_ps}) / sqrt(2),

where each arm field is the ring transfer applied to 1/sqrt(2) of the
unit input.  The equivalent sum-to-product closed forms (power of a
symmetric pair, OMA_E, constant output phase) live in the test suite as
oracles only: real tuned devices never satisfy the symmetry exactly, and
the superposition is valid unconditionally.

Sign conventions worth stating once: for an exactly symmetric pair
(equal amplitudes, opposite phases) the output phase is -phi_ps/2, plus
pi whenever the projection of the field on that axis is negative.  The
"signed level" used by the bias tuner is that projection,
Re(E_out * e^{+i phi_ps/2}), which is monotone through destructive nulls
where the bare magnitude folds.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .devices import ComplexAmplitude, MrmModel, mrm_field
from .errors import AsymmetricDriveWarning, NegativeOmaWarning

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RamziConfig:
    """One RAMZI dimension: two rings, arm phase shifter, bias point.

    ``detuning_offset_pm`` is the intended symmetric resonance offset
    about the laser at the push-pull rest point (mid-swing drive); the
    heater powers are what physically realize it.
    """

    mrm_top: MrmModel
    mrm_bottom: MrmModel
    phi_ps: float
    detuning_offset_pm: float
    laser_wavelength_nm: float
    heater_top_mw: float
    heater_bottom_mw: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi_ps):
            raise ValueError("phi_ps must be finite")
        if self.laser_wavelength_nm <= 0.0:
            raise ValueError("laser_wavelength_nm must be positive")
        if self.detuning_offset_pm < 0.0:
            raise ValueError("detuning_offset_pm must be non-negative")
        if self.heater_top_mw < 0.0 or self.heater_bottom_mw < 0.0:
            raise ValueError("heater powers must be non-negative")


@dataclass(frozen=True)
class DriveLevelEntry:
    v_top: float
    v_bottom: float
    field_level: float


@dataclass(frozen=True)
class DriveLevelTable:
    """Ordered drive pairs and the signed field level each produces.

    ``projection_sign`` resolves the pi ambiguity of the constant-phase
    axis: stored levels are ``projection_sign * Re(E * e^{i phi_ps/2})``,
    with the sign chosen by the tuner so the alphabet increases toward
    the strongly-transmitting extreme.
    """

    entries: tuple[DriveLevelEntry, ...]
    projection_sign: float = 1.0

    def __post_init__(self) -> None:
        if len(self.entries) < 2:
            raise ValueError("a drive table needs at least two entries")
        if self.projection_sign not in (1.0, -1.0):
            raise ValueError("projection_sign must be +1.0 or -1.0")

    @property
    def levels(self) -> np.ndarray:
        return np.array([e.field_level for e in self.entries])

    @property
    def drive_pairs(self) -> list[tuple[float, float]]:
        return [(e.v_top, e.v_bottom) for e in self.entries]


@dataclass(frozen=True)
class Constellation:
    points: tuple[ComplexAmplitude, ...]
    offset: ComplexAmplitude
    oma_e_per_dimension: float


def arm_fields(config: RamziConfig, v_top: float,
               v_bottom: float) -> tuple[ComplexAmplitude, ComplexAmplitude]:
    """Fields at the combiner input: ring transfer on 1/sqrt(2) of unit input."""
    lam = config.laser_wavelength_nm
    e_t = complex(mrm_field(config.mrm_top, v_top, config.heater_top_mw, lam)) / SQRT2
    e_b = complex(mrm_field(config.mrm_bottom, v_bottom,
                            config.heater_bottom_mw, lam)) / SQRT2
    return ComplexAmplitude.from_complex(e_t), ComplexAmplitude.from_complex(e_b)


def combine_arm_fields(e_top: ComplexAmplitude, e_bottom: ComplexAmplitude,
                       phi_ps: float) -> ComplexAmplitude:
    z = (e_top.as_complex()
         + e_bottom.as_complex() * cmath.exp(-1j * phi_ps)) / SQRT2
    return ComplexAmplitude.from_complex(z)


def ramzi_output(config: RamziConfig, v_top: float,
                 v_bottom: float) -> ComplexAmplitude:
    e_t, e_b = arm_fields(config, v_top, v_bottom)
    return combine_arm_fields(e_t, e_b, config.phi_ps)


def ramzi_output_phase(config: RamziConfig, v_top: float, v_bottom: float,
                       amplitude_tolerance: float = 0.01) -> float:
    """Output phase; warns (does not fail) when the drive pair sits too
    far off the equal-amplitude manifold for the phase to be meaningful."""
    e_t, e_b = arm_fields(config, v_top, v_bottom)
    mismatch = abs(e_t.magnitude - e_b.magnitude)
    if mismatch > amplitude_tolerance:
        warnings.warn(
            f"arm amplitudes differ by {mismatch:.4f} (> {amplitude_tolerance}); "
            f"drive pair ({v_top}, {v_bottom}) is off the push-pull manifold",
            AsymmetricDriveWarning, stacklevel=2)
    return combine_arm_fields(e_t, e_b, config.phi_ps).phase


def ramzi_power(config: RamziConfig, v_top: float, v_bottom: float) -> float:
    return ramzi_output(config, v_top, v_bottom).magnitude ** 2


def ramzi_oma_e(config: RamziConfig, hi_drive: tuple[float, float],
                lo_drive: tuple[float, float]) -> float:
    """|E_hi| - |E_lo|, input-normalized.  A negative result means the
    hi/lo labels are swapped; it is reported as-is with a warning."""
    hi = ramzi_output(config, *hi_drive).magnitude
    lo = ramzi_output(config, *lo_drive).magnitude
    oma = hi - lo
    if oma <= 0.0:
        warnings.warn(
            f"OMA_E came out non-positive ({oma:.4f}); hi/lo drives are "
            "likely mislabeled", NegativeOmaWarning, stacklevel=2)
    return oma


def signed_level(config: RamziConfig, v_top: float, v_bottom: float) -> float:
    """Projection of the output on the constant-phase axis e^{-i phi_ps/2}."""
    z = ramzi_output(config, v_top, v_bottom).as_complex()
    return (z * cmath.exp(1j * config.phi_ps / 2.0)).real


def phase_spread_deg(config: RamziConfig, table: DriveLevelTable) -> float:
    """Max pairwise output-phase spread over the table, in degrees.

    Entries with negative signed level are rotated by pi first, so the
    intentional sign flip of a through-zero alphabet does not count as
    phase error.
    """
    phases = []
    for entry in table.entries:
        z = ramzi_output(config, entry.v_top, entry.v_bottom).as_complex()
        s = (z * cmath.exp(1j * config.phi_ps / 2.0)).real
        if s < 0.0:
            z = -z
        phases.append(cmath.phase(z))
    ref = phases[0]
    rel = [(p - ref + math.pi) % (2.0 * math.pi) - math.pi for p in phases]
    return math.degrees(max(rel) - min(rel))


def detuning_residuals_pm(config: RamziConfig,
                          reference_drive_v: float = -2.0) -> tuple[float, float]:
    """How far the mid-swing resonances sit from laser -/+ detuning, in pm.

    ``reference_drive_v`` is the push-pull rest point, half the standard
    0 to -4 V swing.
    """
    from .devices import resonance_wavelength_nm

    lam = config.laser_wavelength_nm
    delta_nm = config.detuning_offset_pm / 1.0e3
    top = resonance_wavelength_nm(config.mrm_top, reference_drive_v,
                                  config.heater_top_mw)
    bottom = resonance_wavelength_nm(config.mrm_bottom, reference_drive_v,
                                     config.heater_bottom_mw)
    return ((top - (lam - delta_nm)) * 1.0e3,
            (bottom - (lam + delta_nm)) * 1.0e3)


def validate_drive_table(config: RamziConfig, table: DriveLevelTable,
                         spacing_tolerance: float = 0.02,
                         amplitude_tolerance: float = 0.01,
                         phase_tolerance_deg: float = 3.0) -> list[str]:
    """Check the drive-table invariants; returns a list of issue strings
    (empty means the table is valid for this config)."""
    issues: list[str] = []
    levels = table.levels
    if not np.all(np.diff(levels) > 0.0):
        issues.append("field levels are not strictly increasing")
    swing = float(levels[-1] - levels[0])
    if swing > 0.0 and len(levels) > 2:
        gaps = np.diff(levels)
        worst = float(np.max(np.abs(gaps - gaps.mean())))
        if worst > spacing_tolerance * swing:
            issues.append(
                f"level spacing deviates by {worst:.4f} "
                f"(> {spacing_tolerance:.0%} of the {swing:.4f} swing)")
    phase_tol = math.radians(phase_tolerance_deg)
    for k, entry in enumerate(table.entries):
        e_t, e_b = arm_fields(config, entry.v_top, entry.v_bottom)
        amp_mismatch = abs(e_t.magnitude - e_b.magnitude)
        if amp_mismatch > amplitude_tolerance:
            issues.append(
                f"entry {k}: arm amplitudes differ by {amp_mismatch:.4f}")
        phase_sum = e_t.phase + e_b.phase
        phase_sum = (phase_sum + math.pi) % (2.0 * math.pi) - math.pi
        if abs(phase_sum) > phase_tol:
            issues.append(
                f"entry {k}: arm phases are not opposite "
                f"(sum {math.degrees(phase_sum):.2f} deg)")
        actual = table.projection_sign * signed_level(config, entry.v_top,
                                                      entry.v_bottom)
        if abs(actual - entry.field_level) > amplitude_tolerance:
            issues.append(
                f"entry {k}: stored level {entry.field_level:.4f} vs "
                f"recomputed {actual:.4f}")
    return issues


def build_constellation(i_config: RamziConfig, q_config: RamziConfig,
                        i_levels: DriveLevelTable,
                        q_levels: DriveLevelTable) -> Constellation:
    """Offset-QAM constellation: (E_I + i E_Q)/sqrt(2) over the table product.

    Point order is row-major in (I index, Q index), both ascending in
    field level; the I/Q combiner contributes the final 1/sqrt(2), so the
    link budget must not count it again.
    """
    if len(i_levels.entries) != len(q_levels.entries):
        raise ValueError(
            f"level tables disagree in length: {len(i_levels.entries)} vs "
            f"{len(q_levels.entries)}")
    e_i = [ramzi_output(i_config, e.v_top, e.v_bottom).as_complex()
           for e in i_levels.entries]
    e_q = [ramzi_output(q_config, e.v_top, e.v_bottom).as_complex()
           for e in q_levels.entries]
    points = tuple(
        ComplexAmplitude.from_complex((zi + 1j * zq) / SQRT2)
        for zi in e_i for zq in e_q)
    mean = sum(p.as_complex() for p in points) / len(points)
    # per-dimension swing on the table's signed axis (survives alphabets
    # that pass through the destructive null, where |E| alone would fold)
    span_i = i_levels.projection_sign * (
        signed_level(i_config, *i_levels.drive_pairs[-1])
        - signed_level(i_config, *i_levels.drive_pairs[0]))
    span_q = q_levels.projection_sign * (
        signed_level(q_config, *q_levels.drive_pairs[-1])
        - signed_level(q_config, *q_levels.drive_pairs[0]))
    return Constellation(
        points=points,
        offset=ComplexAmplitude.from_complex(mean),
        oma_e_per_dimension=0.5 * (span_i + span_q),
    )
