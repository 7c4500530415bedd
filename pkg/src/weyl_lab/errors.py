"""Exception hierarchy shared by all weyl_lab modules.

ContractError maps to CLI exit code 2, the remaining errors to exit code 3.
"""


class WeylLabError(Exception):
    """Base class for all weyl_lab errors."""


class ContractError(WeylLabError, ValueError):
    """A precondition of an operation was violated by the caller."""


class CapacityError(WeylLabError):
    """A memory or size budget would be exceeded."""


class NumericError(WeylLabError):
    """A numeric limit was hit (underflow, search cap, ...)."""


class PrimeSearchError(NumericError):
    """Prime search exceeded its cap before finding an admissible prime."""


class HypothesisViolationError(NumericError):
    """A declared partial-sum growth hypothesis failed at some prefix length."""

    def __init__(self, m: int, observed: float, allowed: float):
        self.m = m
        self.observed = observed
        self.allowed = allowed
        super().__init__(
            f"partial-sum hypothesis fails at M={m}: |S(M)|={observed:.6g} "
            f"exceeds allowed {allowed:.6g}"
        )
