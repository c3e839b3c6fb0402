"""Exception taxonomy shared across the package."""


class WalshMeansError(Exception):
    """Base class for all package-specific errors."""


class ArgumentError(WalshMeansError, ValueError):
    """An argument violates a documented precondition."""


class ResolutionError(WalshMeansError, ValueError):
    """An operation needs more dyadic resolution than the operands carry."""


class GenerationError(WalshMeansError):
    """Sequence generation left the supported integer range.

    ``max_valid_terms`` holds the number of terms produced before the overflow.
    """

    def __init__(self, message: str, max_valid_terms: int):
        super().__init__(message)
        self.max_valid_terms = max_valid_terms


class IdentityError(WalshMeansError):
    """A runtime identity check failed beyond its tolerance."""


class ConfigError(WalshMeansError):
    """An experiment configuration is inconsistent or unusable."""
