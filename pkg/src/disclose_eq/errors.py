"""Exception hierarchy shared across the package."""


class DiscloseEqError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DiscloseEqError, ValueError):
    """A config file or JSON spec is malformed (CLI exit code 1)."""


class DomainError(DiscloseEqError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InfeasibleCandidateError(DiscloseEqError):
    """No pooling candidate exists for the requested (v_L, r) pair."""


class NoUpperRootError(DiscloseEqError):
    """The pooled branch never re-contacts the prior cdf at this slope.

    Raised by the contact-point search when the slope is too small for the
    pooled cdf to catch up with the prior (the mean condition then has a
    strictly positive residual).
    """


class NoInteriorRootError(DiscloseEqError):
    """The large-market contact equation has no root below 1 at this n."""


class UnsupportedBoundaryError(DiscloseEqError):
    """A boundary parameter value with a non-unique equilibrium (alpha = 1)."""


class ValidationFailureError(DiscloseEqError):
    """A solved object violates one of its structural invariants.

    `invariant` names the failed check so the CLI can report it.
    """

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class BracketError(DiscloseEqError):
    """A root bracket could not be established (indicates a bad prior)."""


class IterationCapError(DiscloseEqError):
    """An integer search exceeded its hard iteration cap."""
