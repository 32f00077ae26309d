"""Exception and warning types."""


class OutOfRangeError(ValueError):
    """A coordinate or region falls outside the sampled window."""


class ResolutionError(ValueError):
    """Grid pitch too coarse for the requested element."""


class SamplingError(ValueError):
    """A propagation would alias or the output window cannot hold the result."""


class UndefinedMetricError(ValueError):
    """A metric's denominator vanishes."""


class InsufficientFringesError(ValueError):
    pass


class ClampWarning(UserWarning):
    """A bound fell outside its physical range and was clamped."""


class NormalizationError(ValueError):
    """An intensity map with zero total power cannot serve as a density."""
