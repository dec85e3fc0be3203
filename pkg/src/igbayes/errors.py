"""Exception hierarchy shared by all igbayes modules."""


class IgBayesError(Exception):
    """Base class for every error raised by this package."""


class DomainError(IgBayesError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class DataError(IgBayesError, ValueError):
    """Observed data violate a precondition (non-positive value, too few points)."""


class DegenerateSampleError(DataError):
    """All observations are equal, so the shape estimate is infinite."""


class InsufficientSampleError(DataError):
    pass


class ImproperConditionalError(IgBayesError, ValueError):
    """The conditional density of mu is not integrable and no truncation bound was given."""


class ConfigError(IgBayesError, ValueError):
    pass


class NumericalError(IgBayesError, ArithmeticError):
    """A numerical routine failed to converge or produced a degenerate result."""
