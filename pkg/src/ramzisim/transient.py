"""PRBS-driven time-domain simulation: amplitude and phase eyes.

Electro-optic dynamics are a single-pole low-pass on the drive voltage
followed by the memoryless circuit map, sample by sample.  One
consequence worth knowing: ramps and the filter are both affine with DC
gain 1, so a push-pull drive pair (v, -4 - v) stays exactly on the
push-pull manifold at every instant.  With matched rings the output
phase is then pinned to the tuned axis throughout transitions and the
phase eye is a flat line; phase spread only appears once the two rings
(or their drives) differ.

Eyes are folded at two unit intervals.  Each waveform is warmed up for
one full period so the filter state at the measured window is the
cyclic steady state, and traces start at every UI of the second period.
The eye center is the UI midpoint, and center phases are referenced to
the tuned config's nominal output phase, the ``projection_sign``
resolved axis ``-phi_ps/2`` of the drive table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .circuit import DriveLevelTable, RamziConfig, phase_spread_deg, ramzi_output
from .devices import mrm_field
from .errors import UntunedConfigError

DEFAULT_SAMPLES_PER_UI = 32
DEFAULT_RISE_FALL_FRACTION = 0.20
DEFAULT_EO_BANDWIDTH_GHZ = 35.0
# second feedback tap of x^n + x^m + 1; the first is always n
_PRBS_TAPS = {7: 6, 15: 14, 31: 28}
# full period is impractical for order 31; default to a window
_PRBS31_DEFAULT_SYMBOLS = 1 << 16
_GRAY_LEVELS = (0, 1, 3, 2)


@dataclass(frozen=True)
class DriveWaveform:
    """Symbol stream plus the electrical model that turns it into volts.

    ``rise_fall_fraction`` is the linear transition time as a fraction
    of the unit interval; 0 gives the ideal piecewise-constant source.
    ``eo_bandwidth_ghz`` may be ``math.inf`` for an instantaneous
    driver.
    """

    baud_rate_gbd: float
    symbol_sequence: np.ndarray
    rise_fall_fraction: float
    level_table: DriveLevelTable
    eo_bandwidth_ghz: float = DEFAULT_EO_BANDWIDTH_GHZ

    def __post_init__(self) -> None:
        if self.baud_rate_gbd <= 0.0:
            raise ValueError("baud_rate_gbd must be positive")
        if not 0.0 <= self.rise_fall_fraction < 0.5:
            raise ValueError("rise_fall_fraction must lie in [0, 0.5)")
        if self.eo_bandwidth_ghz <= 0.0:
            raise ValueError("eo_bandwidth_ghz must be positive")
        seq = np.asarray(self.symbol_sequence)
        if seq.ndim != 1 or seq.size < 127:
            raise ValueError("symbol_sequence must be 1-D with at least "
                             "2^7 - 1 symbols")
        n = len(self.level_table.entries)
        if seq.min() < 0 or seq.max() >= n:
            raise ValueError(f"symbols must index the {n}-entry level table")
        object.__setattr__(self, "symbol_sequence",
                           np.ascontiguousarray(seq, dtype=np.int64))

    @property
    def ui_s(self) -> float:
        return 1.0 / (self.baud_rate_gbd * 1.0e9)


@dataclass(frozen=True)
class EyeDiagram:
    """Folded traces: rows are 2-UI windows starting at every UI.

    ``symbols`` holds the symbol driven during the first UI of each
    trace (the one whose center the metrics sample).
    """

    time_ui: np.ndarray
    traces: np.ndarray
    symbols: np.ndarray
    kind: str


@dataclass(frozen=True)
class EyeMetrics:
    sampled_levels: tuple[float, ...]
    oma_e: float
    phase_error_deg: float
    inner_eye_openings: tuple[float, ...]


def prbs_bits(order: int, n_bits: int) -> np.ndarray:
    """Standard PRBS bit stream (x^n + x^m + 1, all-ones seed)."""
    if order not in _PRBS_TAPS:
        raise ValueError(f"order must be one of {sorted(_PRBS_TAPS)}")
    tap2 = _PRBS_TAPS[order]
    state = (1 << order) - 1
    mask = state
    out = np.empty(n_bits, dtype=np.uint8)
    for i in range(n_bits):
        newbit = ((state >> (order - 1)) ^ (state >> (tap2 - 1))) & 1
        state = ((state << 1) | newbit) & mask
        out[i] = newbit
    return out


def prbs_symbol_period(order: int) -> int:
    """Symbols before the 2-bit stream repeats: 2^order - 1 (odd, so
    pairing two bits per symbol does not shorten the period)."""
    if order not in _PRBS_TAPS:
        raise ValueError(f"order must be one of {sorted(_PRBS_TAPS)}")
    return (1 << order) - 1


def generate_prbs_drive(order: int, baud_rate_gbd: float,
                        level_table: DriveLevelTable,
                        rise_fall_fraction: float = DEFAULT_RISE_FALL_FRACTION,
                        *, eo_bandwidth_ghz: float = DEFAULT_EO_BANDWIDTH_GHZ,
                        n_symbols: int | None = None,
                        symbol_offset: int = 0) -> DriveWaveform:
    """PRBS-driven 4-level waveform, two bits per symbol, Gray mapped.

    The generator is fully deterministic (all-ones seed).  For a second
    decorrelated tributary use ``symbol_offset`` to rotate the sequence,
    conventionally by half a period.  ``n_symbols`` defaults to one full
    period, except order 31 where a 65536-symbol window stands in for
    the impractical 2^31 - 1.
    """
    if n_symbols is None:
        n_symbols = (_PRBS31_DEFAULT_SYMBOLS if order == 31
                     else prbs_symbol_period(order))
    if n_symbols < 127:
        raise ValueError("n_symbols must be at least 127")
    bits = prbs_bits(order, 2 * n_symbols).astype(np.int64)
    idx = 2 * bits[0::2] + bits[1::2]
    symbols = np.array(_GRAY_LEVELS, dtype=np.int64)[idx]
    if symbol_offset:
        symbols = np.roll(symbols, -int(symbol_offset))
    return DriveWaveform(baud_rate_gbd=baud_rate_gbd,
                         symbol_sequence=symbols,
                         rise_fall_fraction=rise_fall_fraction,
                         level_table=level_table,
                         eo_bandwidth_ghz=eo_bandwidth_ghz)


def _ramp_profile(rise_fall_fraction: float, samples_per_ui: int) -> np.ndarray:
    frac = np.arange(samples_per_ui) / samples_per_ui
    if rise_fall_fraction == 0.0:
        return np.ones(samples_per_ui)
    return np.minimum(frac / rise_fall_fraction, 1.0)


def _synthesize_arm(symbols_ext: np.ndarray, arm_levels: np.ndarray,
                    ramp: np.ndarray) -> np.ndarray:
    tgt = arm_levels[symbols_ext]
    prev = np.roll(tgt, 1)
    return (prev[:, None] + (tgt - prev)[:, None] * ramp[None, :]).ravel()


def _single_pole(x: np.ndarray, f3db_ghz: float, dt_s: float) -> np.ndarray:
    alpha = 1.0 - math.exp(-2.0 * math.pi * f3db_ghz * 1.0e9 * dt_s)
    # unity DC gain by construction; start settled at the first sample
    y, _ = lfilter([alpha], [1.0, -(1.0 - alpha)], x,
                   zi=np.array([(1.0 - alpha) * x[0]]))
    return y


def drive_voltage_samples(wave: DriveWaveform,
                          samples_per_ui: int = DEFAULT_SAMPLES_PER_UI
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Filtered (v_top, v_bottom) over one period, for inspection/export.

    Synthesis runs over a warmup period first, exactly as simulate_eye
    does, and returns the second (cyclically settled) period.
    """
    vt, vb, period = _arm_samples(wave, samples_per_ui)
    lo = period * samples_per_ui
    hi = 2 * period * samples_per_ui
    return vt[lo:hi], vb[lo:hi]


def _arm_samples(wave: DriveWaveform, samples_per_ui: int
                 ) -> tuple[np.ndarray, np.ndarray, int]:
    seq = wave.symbol_sequence
    period = seq.size
    ext = np.concatenate([seq, seq, seq[:2]])
    ramp = _ramp_profile(wave.rise_fall_fraction, samples_per_ui)
    v_top_levels = np.array([e.v_top for e in wave.level_table.entries])
    v_bot_levels = np.array([e.v_bottom for e in wave.level_table.entries])
    dt = wave.ui_s / samples_per_ui
    vt = _synthesize_arm(ext, v_top_levels, ramp)
    vb = _synthesize_arm(ext, v_bot_levels, ramp)
    if math.isfinite(wave.eo_bandwidth_ghz):
        vt = _single_pole(vt, wave.eo_bandwidth_ghz, dt)
        vb = _single_pole(vb, wave.eo_bandwidth_ghz, dt)
    return vt, vb, period


def _fold_wave(config: RamziConfig, wave: DriveWaveform,
               samples_per_ui: int) -> tuple[np.ndarray, np.ndarray]:
    vt, vb, period = _arm_samples(wave, samples_per_ui)
    lam = config.laser_wavelength_nm
    field = (mrm_field(config.mrm_top, vt, config.heater_top_mw, lam)
             + mrm_field(config.mrm_bottom, vb, config.heater_bottom_mw, lam)
             * np.exp(-1j * config.phi_ps)) / 2.0
    starts = (period + np.arange(period)) * samples_per_ui
    cols = np.arange(2 * samples_per_ui)
    return field[starts[:, None] + cols[None, :]], wave.symbol_sequence


def simulate_eye(config: RamziConfig, wave_i: DriveWaveform,
                 wave_q: DriveWaveform,
                 samples_per_ui: int = DEFAULT_SAMPLES_PER_UI, *,
                 phase_budget_deg: float = 3.0
                 ) -> tuple[EyeDiagram, EyeDiagram, EyeMetrics]:
    """Fold both tributaries of the transmitter into shared I/Q eyes.

    Both waveforms run through the same tuned RAMZI dimension (the two
    dimensions of the transmitter are identically tuned); their traces
    are overlaid and the metrics are computed over the union of
    eye-center samples.  Refuses configs whose static drive table
    already spreads more than 5x the phase budget, since eye metrics on
    a broken bias are meaningless.
    """
    if samples_per_ui < 4 or samples_per_ui % 2:
        raise ValueError("samples_per_ui must be an even number >= 4")
    if wave_i.baud_rate_gbd != wave_q.baud_rate_gbd:
        raise ValueError("tributaries must share one baud rate")
    for name, wave in (("I", wave_i), ("Q", wave_q)):
        spread = phase_spread_deg(config, wave.level_table)
        if spread > 5.0 * phase_budget_deg:
            raise UntunedConfigError(
                f"static phase spread {spread:.2f} deg on the {name} table "
                f"exceeds 5x the {phase_budget_deg:g} deg budget; "
                "re-run the bias tuner before simulating eyes")

    table = wave_i.level_table
    traces_i, syms_i = _fold_wave(config, wave_i, samples_per_ui)
    traces_q, syms_q = _fold_wave(config, wave_q, samples_per_ui)
    traces = np.vstack([traces_i, traces_q])
    symbols = np.concatenate([syms_i, syms_q])

    amp = np.abs(traces)
    ref = table.projection_sign * np.exp(1j * config.phi_ps / 2.0)
    phase = np.angle(traces * ref)

    center = samples_per_ui // 2
    c_amp = amp[:, center]
    c_phase = phase[:, center]

    static_mag = [abs(ramzi_output(config, e.v_top, e.v_bottom).as_complex())
                  for e in table.entries]
    n_states = len(table.entries)
    bands = [c_amp[symbols == s] for s in range(n_states)]
    levels = tuple(float(b.mean()) if b.size else static_mag[s]
                   for s, b in enumerate(bands))
    openings = tuple(
        float((bands[s + 1].min() if bands[s + 1].size else static_mag[s + 1])
              - (bands[s].max() if bands[s].size else static_mag[s]))
        for s in range(n_states - 1))
    metrics = EyeMetrics(
        sampled_levels=levels,
        oma_e=levels[-1] - levels[0],
        phase_error_deg=math.degrees(float(c_phase.max() - c_phase.min())),
        inner_eye_openings=openings)

    time_ui = np.arange(2 * samples_per_ui) / samples_per_ui
    amp_eye = EyeDiagram(time_ui=time_ui, traces=amp, symbols=symbols,
                         kind="amplitude")
    phase_eye = EyeDiagram(time_ui=time_ui, traces=np.degrees(phase),
                           symbols=symbols, kind="phase")
    return amp_eye, phase_eye, metrics
