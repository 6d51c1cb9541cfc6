"""ramzisim: simulation toolkit for ring-assisted MZI optical transmitters.

The package splits along the simulation chain:

- :mod:`ramzisim.devices`    microring and MZM component models
- :mod:`ramzisim.circuit`    two-ring interferometer and constellations
- :mod:`ramzisim.tuning`     static bias search and drive-level solving
- :mod:`ramzisim.transient`  PRBS drives and eye diagrams
- :mod:`ramzisim.thermal`    self-heating dynamics and stability sweeps
- :mod:`ramzisim.link`       receiver budgets, BER, phase noise, energy
- :mod:`ramzisim.config`     validated experiment configuration
- :mod:`ramzisim.cli`        the ``ramzisim`` command-line tool
"""

from .circuit import (Constellation, DriveLevelEntry, DriveLevelTable,
                      RamziConfig, build_constellation, ramzi_output,
                      signed_level)
from .config import ExperimentConfig, default_config, load_config
from .devices import ComplexAmplitude, MrmModel, MzmModel, calibrate_mrm
from .errors import (CalibrationError, ConfigError, InfeasibleBiasError,
                     RamziSimError, ThermalInstabilityError,
                     UnreachableTargetError, UntunedConfigError)
from .link import (LINK_FORMATS, BerCurve, FormatComparison, LinkConfig,
                   PhaseNoise, SignalBudget, ber, ber_with_phase_noise,
                   calibrate_noise_bandwidth, compare_formats,
                   laser_energy_fj_per_bit, phase_noise_sigma_rad,
                   required_power, signal_chain, simulate_ber_monte_carlo)
from .thermal import (StabilityReport, ThermalTrace, instability_onset,
                      is_unstable, sweep_and_diagnose)
from .transient import (DriveWaveform, EyeDiagram, EyeMetrics,
                        generate_prbs_drive, simulate_eye)
from .tuning import (BiasSolution, SweepSpec, detuning_phase_surface,
                     find_drive_levels, retune_at_power, tune_static)

__version__ = "0.1.0"

__all__ = [
    "BerCurve",
    "BiasSolution",
    "CalibrationError",
    "ComplexAmplitude",
    "ConfigError",
    "Constellation",
    "DriveLevelEntry",
    "DriveLevelTable",
    "DriveWaveform",
    "ExperimentConfig",
    "EyeDiagram",
    "EyeMetrics",
    "FormatComparison",
    "InfeasibleBiasError",
    "LINK_FORMATS",
    "LinkConfig",
    "MrmModel",
    "MzmModel",
    "PhaseNoise",
    "RamziConfig",
    "RamziSimError",
    "SignalBudget",
    "StabilityReport",
    "SweepSpec",
    "ThermalInstabilityError",
    "ThermalTrace",
    "UnreachableTargetError",
    "UntunedConfigError",
    "ber",
    "ber_with_phase_noise",
    "build_constellation",
    "calibrate_mrm",
    "calibrate_noise_bandwidth",
    "compare_formats",
    "default_config",
    "detuning_phase_surface",
    "find_drive_levels",
    "generate_prbs_drive",
    "instability_onset",
    "is_unstable",
    "laser_energy_fj_per_bit",
    "load_config",
    "phase_noise_sigma_rad",
    "ramzi_output",
    "required_power",
    "retune_at_power",
    "signal_chain",
    "signed_level",
    "simulate_ber_monte_carlo",
    "simulate_eye",
    "sweep_and_diagnose",
    "tune_static",
    "__version__",
]
