"""Exception and warning types shared across the toolkit.

Every error raised deliberately by this package derives from
:class:`RamziSimError` so callers can catch the whole family with one
``except`` clause while still being able to discriminate failure modes.
"""

from __future__ import annotations


class RamziSimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RamziSimError):
    """A configuration file or parameter set failed validation."""


class CalibrationError(RamziSimError):
    """A device calibration target could not be met.

    Raised when the requested quality factor, coupling regime, or
    efficiency is outside what the ring geometry can realize.
    """


class InfeasibleBiasError(RamziSimError):
    """No bias point satisfies the requested level constraints."""


class UntunedConfigError(RamziSimError):
    """A transmitter configuration is too far from its symmetric bias.

    Time-domain simulation refuses to run when the static drive table
    already violates the constant-output-phase condition, because eye
    metrics computed from such a table are meaningless.
    """


class ThermalInstabilityError(RamziSimError):
    """Requested operating point sits inside a thermally bistable region."""


class UnreachableTargetError(RamziSimError):
    """A power or BER target cannot be reached within the search bounds."""


class AsymmetricDriveWarning(UserWarning):
    """Drive table deviates from the push-pull symmetry manifold."""


class NegativeOmaWarning(UserWarning):
    """Computed outer modulation amplitude came out non-positive."""


class SpacingResidualWarning(UserWarning):
    """Optimized levels deviate from uniform spacing beyond tolerance."""
