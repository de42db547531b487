"""Exception types shared across the package."""

from __future__ import annotations


class NegsumError(Exception):
    """Base class for all package errors."""


class ValidationError(NegsumError):
    """Raised when a diagram violates the well-formedness conditions.

    `violations` is a list of human-readable strings, each naming the
    violated condition and the offending element.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(NegsumError):
    """Raised on malformed input files, with element context in the message."""


class NotEnabled(NegsumError):
    def __init__(self, outcome, marking):
        self.outcome = outcome
        self.marking = marking
        super().__init__(f"outcome {outcome} not enabled at {marking}")


class BudgetExceeded(NegsumError):
    """Exploration exceeded its node budget. `partial` holds what was built."""

    def __init__(self, cap, partial=None):
        self.cap = cap
        self.partial = partial
        super().__init__(f"exploration budget of {cap} nodes exceeded")


class GuardFailed(NegsumError):
    """A reduction rule's guard does not hold at the requested site."""


class StateSpaceMismatch(NegsumError):
    pass


class UnboundAtomic(NegsumError):
    def __init__(self, tag):
        self.tag = tag
        super().__init__(f"no concrete interpretation for atomic transformer {tag}")


class NotAcyclic(NegsumError):
    pass


class NotDeterministic(NegsumError):
    pass


class NotOneAgentOrReplication(NegsumError):
    pass
