"""Exception types shared across the package."""


class WrlabError(Exception):
    """Base class for all wrlab errors."""


class InvalidInputError(WrlabError, ValueError):
    """A value is outside the documented domain of an operation."""


class AllTiesError(WrlabError):
    """Every pairwise comparison tied; the win ratio is undefined."""


class DegenerateCountsError(WrlabError):
    """Zero wins or zero losses; asymptotic inference is invalid.

    Bootstrap or Wilson-based inference remains usable in this situation.
    """


class InfeasibleParameterError(WrlabError):
    """A requested target cannot be reached by any parameter value."""


class InfiniteSampleSizeError(WrlabError):
    """Sample size diverges (requested effect is the null value)."""


class UnboundedVarianceError(WrlabError):
    """Variance formula diverges (tie probability at or above one)."""


class UndefinedStatisticError(WrlabError):
    """Test statistic has zero variance and is undefined."""


class DatasetFormatError(WrlabError, ValueError):
    """A dataset or config file does not conform to the documented schema."""
