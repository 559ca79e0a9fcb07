"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid physical parameters, operators, or file contents."""


class ExtractionError(RuntimeError):
    """An indistinguishability extraction could not be completed."""


class DegenerateDataError(ValidationError):
    """Input data cannot constrain the requested parameters."""


class SteadyStateError(RuntimeError):
    """No unique physical steady state exists for the given generator."""
