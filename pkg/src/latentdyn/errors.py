"""Exception hierarchy shared by every latentdyn module.

Two broad failure families matter to callers (and to the CLI exit-code
mapping): problems with inputs or configuration, and numerical failures
that arise while computing on valid inputs.
"""


class LatentDynError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(LatentDynError):
    """A parameter or configuration value violates a documented precondition."""


class DataError(LatentDynError):
    """Input data is malformed, incomplete, or out of the supported domain."""


class ShapeError(LatentDynError):
    """Array operands have incompatible shapes for the requested operation."""


class NumericsError(LatentDynError):
    """A computation failed numerically (divergence, NaN, degenerate geometry)."""
