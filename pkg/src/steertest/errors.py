"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ConfigError -> 1, ingest/validation
errors -> 2, everything else that escapes -> 3.
"""


class SteerTestError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SteerTestError):
    """Bad run configuration or config file."""


class FormatError(SteerTestError):
    """Malformed model container or image file."""


class ModelValidationError(SteerTestError):
    """Structurally invalid model (shape chain, non-finite weights, ...)."""


class ShapeError(SteerTestError):
    """Input shape incompatible with the model or operation."""


class EmptyModelError(SteerTestError):
    """Model contributes zero coverage-countable neurons."""


class ModelMismatchError(SteerTestError):
    """Set algebra attempted across different model fingerprints."""


class ParamError(SteerTestError):
    """Transformation parameter outside its legal range."""


class InputError(SteerTestError):
    """Misaligned, empty, or out-of-range analysis inputs."""


class DegenerateSampleError(SteerTestError):
    """Statistic undefined on this sample (zero variance, ...)."""


class IngestError(SteerTestError):
    """Dataset directory inconsistent with its labels.csv."""


class LabelRangeError(IngestError):
    """Steering label outside the +/- 25 degree hardware range."""
