"""Exception types shared across the package.

The command line maps these onto exit codes: validation problems exit
with 1, numerical failures with 2.
"""


class ValidationError(ValueError):
    """Inputs violate a model invariant (parameters, policies, config)."""


class PolicySpaceTooLarge(ValidationError):
    """Exhaustive policy enumeration refused; carries the computed size."""

    def __init__(self, size: int, cap: int):
        super().__init__(
            f"policy space holds {size} policies, above the enumeration cap {cap}"
        )
        self.size = size
        self.cap = cap


class StateNotFoundError(KeyError):
    """A state triple is not a member of the state space."""


class NumericalError(RuntimeError):
    """A linear solve or factorization failed (singular or ill-conditioned)."""
