"""Exception hierarchy shared by every module.

Each exception carries the process exit status the command-line front end
reports when it escapes a subcommand.
"""

from __future__ import annotations


class ChebfamError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(ChebfamError, ValueError):
    """Input violates a documented precondition."""

    exit_code = 1


class MembershipError(ValidationError):
    """An element was expected to lie in a group and does not."""


class CapExceededError(ChebfamError):
    """A configured size cap (group order, sieve bound, class number...) was hit."""

    exit_code = 2


class RamifiedPrimeError(ValidationError):
    """A Frobenius pattern was requested at a prime dividing the discriminant."""


class ConsistencyError(ValidationError):
    """Observed data contradicts a claimed structure (e.g. a mislabeled Galois group)."""


class ConstructionError(ChebfamError):
    """An exact verification step of a numeric construction failed."""

    exit_code = 1


class FitError(ValidationError):
    """Not enough data to fit a growth exponent."""


class InfeasibleError(ValidationError):
    """Parameters fall outside the region where a closed-form threshold exists."""
