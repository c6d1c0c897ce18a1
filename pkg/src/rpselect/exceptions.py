"""Exception hierarchy for rpselect."""


class RpSelectError(ValueError):
    """Base class for all errors raised by rpselect."""


class InvalidInputError(RpSelectError):
    """Non-finite values, mismatched shapes or out-of-domain arguments."""


class SingularDesignError(RpSelectError):
    """The design matrix (or a derived matrix) is not of full rank."""


class InsufficientDataError(RpSelectError):
    """Fewer observations than the model needs."""


class DegenerateWeightsError(RpSelectError):
    """All robust weights underflowed to zero during fitting.

    Usually fixed by a smaller tuning parameter or a warm start closer to the
    bulk of the data.
    """


class NoValidModelError(RpSelectError):
    """Every candidate model failed to fit."""


class ConfigError(RpSelectError):
    """Invalid simulation or command-line configuration."""


class ParseError(RpSelectError):
    """Malformed delimited-text input."""
