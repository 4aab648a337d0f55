"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ParameterError(ValueError):
    """A tolerance, index or configuration value is invalid."""


class SizeError(ValueError):
    """A requested object is too large to materialize."""


class InconclusiveError(RuntimeError):
    """Refinement budget exhausted before the requested precision.

    ``enclosure`` holds the best certified enclosure reached so far.
    """

    def __init__(self, message, enclosure=None, partial=None):
        super().__init__(message)
        self.enclosure = enclosure
        self.partial = partial
