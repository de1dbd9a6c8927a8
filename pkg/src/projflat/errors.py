"""Exception taxonomy shared across the package."""


class ProjFlatError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(ProjFlatError, ValueError):
    """Input vector length does not match the declared dimension."""


class DomainError(ProjFlatError):
    """Evaluation requested outside the guaranteed domain (includes y = 0)."""


class BranchCutError(DomainError):
    """A complex square root could not be resolved to a unique metric branch."""


class SolverError(ProjFlatError):
    """Fixed-point solve failed: no bracket, divergence, or iteration cap hit."""


class SpecParseError(ProjFlatError, ValueError):
    """Malformed metric or norm descriptor string."""
