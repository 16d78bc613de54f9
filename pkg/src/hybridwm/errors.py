"""Exception taxonomy shared across the package."""


class HwmError(Exception):
    """Base class for all package errors."""


class ConfigError(HwmError):
    """Malformed or inconsistent configuration."""


class ShapeMismatchError(HwmError):
    """Tensor or state shapes incompatible with the requested operation."""


class NonFiniteError(HwmError):
    """A NaN or infinity appeared where only finite values are allowed."""


class InvalidHorizonError(HwmError):
    """Horizon not usable for the requested probe or prediction."""


class SingleHorizonProbeError(HwmError):
    """Step-doubling probe requested on a single-horizon checkpoint.

    The probe compares predictions at T and T/2; a model trained at one
    horizon has no half-horizon contract, so the probe is structurally
    undefined rather than merely inaccurate.
    """


class NotApplicableError(HwmError):
    """Trust signal undefined for this environment or state shape."""


class UndefinedMetricError(HwmError):
    """Metric has no defined value on this input (e.g. single-class AUROC)."""


class SolverAbortError(HwmError):
    """Reference solver hit a non-physical state or failed to converge."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class FileFormatError(HwmError):
    """Base class for trajectory/checkpoint file problems."""


class BadMagicError(FileFormatError):
    pass


class VersionMismatchError(FileFormatError):
    pass


class TruncatedFileError(FileFormatError):
    pass


class ChecksumError(FileFormatError):
    pass


class EnvMismatchError(FileFormatError):
    pass


class MissingPrerequisiteError(HwmError):
    """A pipeline command was run before the artifacts it needs exist."""
