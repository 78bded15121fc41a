"""Exception types shared across the package."""


class AreaAngleError(Exception):
    """Base class for every error raised by this package."""


class ParseError(AreaAngleError, ValueError):
    """Input text is malformed or does not follow the expected schema."""


class ValidationError(AreaAngleError, ValueError):
    """A network or area definition violates a structural invariant."""


class IslandingOutageError(ValidationError):
    """The requested outage would split the network into islands."""


class DegenerateAreaError(AreaAngleError):
    """The area cannot support the computation.

    Raised when the two sides of the area are electrically decoupled
    (area susceptance indistinguishable from zero) or when a stress
    direction is undefined because a side has no net base-case flow.
    """


class NumericError(AreaAngleError):
    """A linear solve failed or left an unacceptable residual."""
