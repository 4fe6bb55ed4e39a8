"""Exception types shared across the package."""


class ConicHeatError(Exception):
    """Base class for all errors raised by conicheat."""


class DomainError(ConicHeatError, ValueError):
    """An argument lies outside the domain where the formula is defined."""


class CapacityError(ConicHeatError):
    """A requested degree or series length exceeds the configured cap."""


class UnsupportedError(ConicHeatError):
    """The requested (domain, parity) combination has no closed-form kernel."""


class TruncationError(CapacityError):
    """The heat series cannot meet its tail tolerance within ``n_max`` terms."""

    def __init__(self, message, achieved_bound=None):
        super().__init__(message)
        self.achieved_bound = achieved_bound


class LogUnderflowError(ConicHeatError):
    """The kernel value is below what double precision can resolve.

    ``log_envelope`` carries the natural-log envelope estimate for the point,
    ``reason`` is ``"underflow"`` or ``"roundoff"``.
    """

    def __init__(self, message, log_envelope=None, reason="underflow"):
        super().__init__(message)
        self.log_envelope = log_envelope
        self.reason = reason
