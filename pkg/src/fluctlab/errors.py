"""Exception hierarchy. Every error raised by fluctlab derives from FluctlabError."""


class FluctlabError(Exception):
    pass


class InvalidSampleSize(FluctlabError, ValueError):
    pass


class DensityNotPositive(FluctlabError, ValueError):
    pass


class FiberUndefined(FluctlabError, ValueError):
    pass


class PointMassFiber(FluctlabError, ValueError):
    pass


class OutOfRange(FluctlabError, ValueError):
    pass


class DeltaTooLarge(OutOfRange):
    pass


class InvalidExponent(FluctlabError, ValueError):
    pass


class DimensionError(FluctlabError, ValueError):
    pass


class SolverFailure(FluctlabError, RuntimeError):
    pass


class UncoveredSample(FluctlabError, ValueError):
    pass


class PreconditionNotMet(FluctlabError, ValueError):
    """Raised when a check does not apply to the given input (not a failure of the check)."""


class ConfigError(FluctlabError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
