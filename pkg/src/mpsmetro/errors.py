"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateStateError(ValueError):
    """Amplitudes vanish identically and cannot be normalized."""


class EmptyBranchError(ValueError):
    """A loss branch with zero probability was asked for its distribution."""


class CapabilityError(RuntimeError):
    """Problem size exceeds what the requested method supports."""


class UndefinedPrecisionError(ValueError):
    """Fisher information is not positive, so no finite precision exists."""


class NoSignalError(ValueError):
    """The measured observable has zero slope at the operating point."""


class OptimizationFailed(RuntimeError):
    """Every start of a multi-start search ended on a degenerate point."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])
