"""Tests for the RAMZI field algebra.

The closed forms used as oracles here (power, OMA_E, output phase of a
symmetric pair) are implemented inline from the sum-to-product identity;
the production path always goes through direct complex superposition.

The "tuned" fixture freezes the bias point found by an independent
grid-study script: detuning 110 pm, arm phase 283.5 deg, drive extremes
(0, -4)/(-4, 0), heaters placed so the mid-swing (-2 V) resonances sit at
the laser wavelength -/+ 110 pm.
"""

import math
import warnings

import numpy as np
import pytest

from ramzisim.circuit import (
    Constellation,
    DriveLevelEntry,
    DriveLevelTable,
    RamziConfig,
    arm_fields,
    build_constellation,
    combine_arm_fields,
    detuning_residuals_pm,
    phase_spread_deg,
    ramzi_oma_e,
    ramzi_output,
    ramzi_output_phase,
    ramzi_power,
    signed_level,
    validate_drive_table,
)
from ramzisim.devices import ComplexAmplitude, calibrate_mrm
from ramzisim.errors import AsymmetricDriveWarning, NegativeOmaWarning

# Frozen from the independent grid study (blend objective, coarse grid).
TUNED_DELTA_PM = 110.0
TUNED_PHI_PS = 283.5 * math.pi / 180.0
TUNED_LEVELS = (0.073989, 0.291318, 0.508647, 0.725976)
TUNED_VTOPS = (0.0, -1.076785, -2.222813, -4.0)
TUNED_OMA_E = 0.651987


def gf_tuned_config(delta_pm=TUNED_DELTA_PM, phi_ps=TUNED_PHI_PS):
    mrm = calibrate_mrm(3500.0, 45.0, "critical")
    # Heater that parks the 0 V resonance at laser + (90 - delta) pm (top)
    # or laser + (90 + delta) pm (bottom); 90 pm is the mid-swing shift.
    coeff = mrm.thermal_shift_coefficient_pm_per_mw
    heater_top = 22.25 + (90.0 - delta_pm) / coeff
    heater_bottom = 22.25 + (90.0 + delta_pm) / coeff
    return RamziConfig(
        mrm_top=mrm,
        mrm_bottom=mrm,
        phi_ps=phi_ps,
        detuning_offset_pm=delta_pm,
        laser_wavelength_nm=1310.0,
        heater_top_mw=heater_top,
        heater_bottom_mw=heater_bottom,
    )


def tuned_table(config):
    # raw projections are negative at this bias point; store on the
    # flipped axis so levels increase toward the transmitting extreme
    entries = []
    for v in TUNED_VTOPS:
        lvl = -signed_level(config, v, -4.0 - v)
        entries.append(DriveLevelEntry(v, -4.0 - v, lvl))
    entries.sort(key=lambda e: e.field_level)
    return DriveLevelTable(tuple(entries), projection_sign=-1.0)


def symmetric_pair(amplitude, phi):
    """Analytically symmetric arm fields A*e^{+i phi}, A*e^{-i phi}."""
    return (ComplexAmplitude.from_polar(amplitude, phi),
            ComplexAmplitude.from_polar(amplitude, -phi))


def closed_form_power(a_x, phi_x, phi_ps):
    return a_x**2 * (1.0 + math.cos(2.0 * phi_x + phi_ps))


def closed_form_oma_e(a_hi, phi_hi, a_lo, phi_lo, phi_ps):
    hi = a_hi * math.sqrt(max(0.0, 1.0 + math.cos(2.0 * phi_hi + phi_ps)))
    lo = a_lo * math.sqrt(max(0.0, 1.0 + math.cos(2.0 * phi_lo + phi_ps)))
    return hi - lo


def test_constructive_unitarity():
    e_t, e_b = symmetric_pair(1.0 / math.sqrt(2.0), 0.0)
    out = combine_arm_fields(e_t, e_b, 0.0)
    assert out.magnitude == pytest.approx(1.0, abs=1e-15)


def test_destructive_null():
    e_t, e_b = symmetric_pair(1.0 / math.sqrt(2.0), 0.0)
    out = combine_arm_fields(e_t, e_b, math.pi)
    assert out.magnitude < 1e-15


def test_power_matches_closed_form_over_random_symmetric_configs():
    # Disagreement normalized to the configuration's power scale 2*A^2;
    # a plain relative test is ill-posed arbitrarily close to the nulls.
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(10_000):
        a = rng.uniform(0.05, 1.0 / math.sqrt(2.0))
        phi = rng.uniform(-math.pi, math.pi)
        phi_ps = rng.uniform(0.0, 2.0 * math.pi)
        e_t, e_b = symmetric_pair(a, phi)
        direct = combine_arm_fields(e_t, e_b, phi_ps).magnitude ** 2
        closed = closed_form_power(a, phi, phi_ps)
        worst = max(worst, abs(direct - closed) / (2.0 * a * a))
    assert worst < 1e-12


def test_oma_matches_closed_form_over_random_symmetric_configs():
    rng = np.random.default_rng(203)
    worst = 0.0
    for _ in range(10_000):
        a_hi, a_lo = rng.uniform(0.05, 1.0 / math.sqrt(2.0), size=2)
        phi_hi, phi_lo = rng.uniform(-math.pi, math.pi, size=2)
        phi_ps = rng.uniform(0.0, 2.0 * math.pi)
        hi = combine_arm_fields(*symmetric_pair(a_hi, phi_hi), phi_ps)
        lo = combine_arm_fields(*symmetric_pair(a_lo, phi_lo), phi_ps)
        direct = hi.magnitude - lo.magnitude
        closed = closed_form_oma_e(a_hi, phi_hi, a_lo, phi_lo, phi_ps)
        scale = math.sqrt(2.0) * (a_hi + a_lo)
        worst = max(worst, abs(direct - closed) / scale)
    assert worst < 1e-12


def test_output_phase_independent_of_symmetric_level():
    phi_ps = 1.1
    p1 = combine_arm_fields(*symmetric_pair(0.4, 0.2), phi_ps).phase
    p2 = combine_arm_fields(*symmetric_pair(0.4, 0.5), phi_ps).phase
    assert abs(p1 - p2) < 1e-12


def test_output_phase_is_minus_half_phi_ps():
    # cos(phi_x + phi_ps/2) > 0 here, so no sign flip
    out = combine_arm_fields(*symmetric_pair(0.3, 0.45), 0.8)
    assert out.phase == pytest.approx(-0.4, abs=1e-12)
    out0 = combine_arm_fields(*symmetric_pair(0.3, 0.2), 0.0)
    assert abs(out0.phase) < 1e-12


def test_tuned_extremes_hit_published_level_window():
    config = gf_tuned_config()
    hi = ramzi_output(config, -4.0, 0.0)
    lo = ramzi_output(config, 0.0, -4.0)
    assert abs(hi.magnitude - 0.72) < 0.05
    assert abs(lo.magnitude - 0.08) < 0.05
    # frozen study values, tighter
    assert hi.magnitude == pytest.approx(TUNED_LEVELS[3], abs=1e-5)
    assert lo.magnitude == pytest.approx(TUNED_LEVELS[0], abs=1e-5)


def test_tuned_oma_e_matches_study_and_window():
    config = gf_tuned_config()
    oma = ramzi_oma_e(config, (-4.0, 0.0), (0.0, -4.0))
    assert abs(oma - 0.64) < 0.05
    assert oma == pytest.approx(TUNED_OMA_E, abs=1e-5)


def test_negative_oma_reported_not_swapped():
    config = gf_tuned_config()
    with pytest.warns(NegativeOmaWarning):
        oma = ramzi_oma_e(config, (0.0, -4.0), (-4.0, 0.0))
    assert oma == pytest.approx(-TUNED_OMA_E, abs=1e-5)


def test_production_path_phase_constancy_and_spread():
    config = gf_tuned_config()
    table = tuned_table(config)
    phases = [ramzi_output_phase(config, e.v_top, e.v_bottom)
              for e in table.entries]
    spread = max(phases) - min(phases)
    # exact push-pull symmetry survives the wavelength arithmetic
    assert spread < 1e-9
    assert phase_spread_deg(config, table) < 3.0
    # constant phase is -phi_ps/2 + pi here (signed level is negative)
    expect = (-TUNED_PHI_PS / 2.0 + math.pi)
    assert phases[0] == pytest.approx(expect, abs=1e-9)


def test_output_phase_flags_asymmetric_pair():
    config = gf_tuned_config()
    with pytest.warns(AsymmetricDriveWarning):
        ramzi_output_phase(config, -0.3, -0.9)  # off the push-pull manifold


def test_drive_table_validation_passes_for_tuned_table():
    config = gf_tuned_config()
    table = tuned_table(config)
    assert validate_drive_table(config, table) == []
    levels = [e.field_level for e in table.entries]
    assert all(b > a for a, b in zip(levels, levels[1:]))
    gaps = np.diff(levels)
    swing = levels[-1] - levels[0]
    assert np.max(np.abs(gaps - gaps.mean())) <= 0.02 * swing


def test_drive_table_validation_catches_violations():
    config = gf_tuned_config()
    bad = DriveLevelTable((
        DriveLevelEntry(0.0, -4.0, 0.07),
        DriveLevelEntry(-1.0, -3.2, 0.30),   # off-manifold, uneven spacing
        DriveLevelEntry(-4.0, 0.0, 0.73),
    ), projection_sign=-1.0)
    issues = validate_drive_table(config, bad)
    assert issues  # at least the spacing and the symmetry violations
    assert any("spacing" in s for s in issues)


def test_mirror_symmetry_conjugates_output():
    config = gf_tuned_config()
    mirrored = RamziConfig(
        mrm_top=config.mrm_bottom,
        mrm_bottom=config.mrm_top,
        phi_ps=-config.phi_ps,
        detuning_offset_pm=config.detuning_offset_pm,
        laser_wavelength_nm=config.laser_wavelength_nm,
        heater_top_mw=config.heater_bottom_mw,
        heater_bottom_mw=config.heater_top_mw,
    )
    for v in (-3.1, -2.0, -0.4):
        orig = ramzi_output(config, v, -4.0 - v).as_complex()
        mirr = ramzi_output(mirrored, -4.0 - v, v).as_complex()
        assert mirr == pytest.approx(orig.conjugate(), abs=1e-12)


def test_detuning_residuals_at_midswing():
    config = gf_tuned_config()
    res_top, res_bottom = detuning_residuals_pm(config)
    assert abs(res_top) < 0.1
    assert abs(res_bottom) < 0.1


def test_signed_level_equals_magnitude_projection():
    config = gf_tuned_config()
    for v in TUNED_VTOPS:
        e = ramzi_output(config, v, -4.0 - v)
        s = signed_level(config, v, -4.0 - v)
        assert abs(abs(s) - e.magnitude) < 1e-12


def test_constellation_cardinality_and_offset():
    config = gf_tuned_config()
    table = tuned_table(config)
    const = build_constellation(config, config, table, table)
    assert len(const.points) == 16
    mean_level = float(np.mean(np.abs([e.field_level for e in table.entries])))
    assert const.offset.magnitude == pytest.approx(mean_level, abs=1e-9)
    # Table-1 style per-dimension mean output field
    assert abs(mean_level - 0.42) < 0.05
    assert const.oma_e_per_dimension == pytest.approx(TUNED_OMA_E, abs=1e-4)


def test_constellation_is_cartesian_product_rotated_90deg():
    config = gf_tuned_config()
    table = tuned_table(config)
    const = build_constellation(config, config, table, table)
    e_i = [ramzi_output(config, e.v_top, e.v_bottom).as_complex()
           for e in table.entries]
    k = 0
    for zi in e_i:
        for zq in e_i:
            want = (zi + 1j * zq) / math.sqrt(2.0)
            got = const.points[k].as_complex()
            assert got == pytest.approx(want, abs=1e-12)
            k += 1


def test_zero_offset_bias_gives_regular_qam():
    # Recentred bias: both resonances at the laser at mid-swing, arm
    # phase pi; the signed-level alphabet is antisymmetric about zero.
    config = gf_tuned_config(delta_pm=0.0, phi_ps=math.pi)
    s_max = signed_level(config, -4.0, 0.0)
    targets = [s_max * f for f in (-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0)]
    from scipy.optimize import brentq
    entries = []
    for s in targets:
        v = brentq(lambda vv, s=s: signed_level(config, vv, -4.0 - vv) - s,
                   -4.0, 0.0, xtol=1e-12)
        entries.append(DriveLevelEntry(v, -4.0 - v, s))
    table = DriveLevelTable(tuple(entries))
    const = build_constellation(config, config, table, table)
    assert const.offset.magnitude <= 0.02
    # centrosymmetric: for every point, its negation is also a point
    pts = np.array([p.as_complex() for p in const.points])
    for z in pts:
        assert np.min(np.abs(pts + z)) < 0.02


def test_constellation_rejects_mismatched_tables():
    config = gf_tuned_config()
    table = tuned_table(config)
    short = DriveLevelTable(table.entries[:3])
    with pytest.raises(ValueError):
        build_constellation(config, config, table, short)


def test_power_equals_magnitude_squared():
    config = gf_tuned_config()
    for v in (-3.7, -1.9, -0.2):
        p = ramzi_power(config, v, -4.0 - v)
        e = ramzi_output(config, v, -4.0 - v)
        assert p == pytest.approx(e.magnitude**2, rel=1e-12)
