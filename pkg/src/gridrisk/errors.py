"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError and ParseError map to 2,
RefusalError (combinatorial caps) maps to 3.
"""


class GridRiskError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GridRiskError):
    """Malformed input text (MATPOWER case, JSON document)."""


class ValidationError(GridRiskError):
    """Structurally parseable input that violates a model invariant."""


class RefusalError(GridRiskError):
    """Request is well-formed but exceeds a hard size cap."""
