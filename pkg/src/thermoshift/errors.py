"""Exception hierarchy shared by all thermoshift modules."""


class ThermoshiftError(Exception):
    """Base class for every error raised by the package."""


class InputError(ThermoshiftError, ValueError):
    """Malformed or inconsistent user input (unknown symbol, bad table, bad config)."""


class TruncationTooSmallError(ThermoshiftError):
    """The finite working state set cannot realize the requested construction."""


class ResolventError(ThermoshiftError):
    """lambda is not safely above the spectral radius of the excursion block."""

    def __init__(self, message: str, radius: float, lam: float):
        super().__init__(message)
        self.radius = radius
        self.lam = lam


class DivergenceError(ResolventError):
    """An induced word series does not converge for the requested eta."""


class DegenerateBlockError(ThermoshiftError):
    """A partition block carries zero conformal mass."""


class DegenerateCouplingError(ThermoshiftError):
    """A coupling coefficient needed as a denominator vanishes."""


class EmptyComponentSetError(ThermoshiftError):
    """No transitive component carries positive pressure."""


class ConstructionError(ThermoshiftError):
    """An interval system violates a hard structural condition."""
