"""Error types shared across the package."""


class GgmError(Exception):
    """Base class for all package errors."""


class InvalidParameter(GgmError, ValueError):
    """A caller-supplied parameter is out of range or inconsistent."""


class GenerationFailed(GgmError, RuntimeError):
    """A randomized generator exhausted its retry budget."""


class NumericFailure(GgmError, RuntimeError):
    """A numeric routine diverged or produced an unusable result."""


class NotPositiveDefinite(NumericFailure):
    """A matrix required to be positive definite is not."""


class ConditioningFailure(NumericFailure):
    """A linear system was too ill conditioned to solve reliably."""


class SynthesisFailed(GgmError, RuntimeError):
    """Model synthesis could not meet the requested target."""
