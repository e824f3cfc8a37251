"""Exception and warning types shared across the package."""


class MacroQEDError(Exception):
    """Base class for all package errors."""


class NonConvergence(MacroQEDError):
    """An adaptive quadrature or series failed to meet its tolerance."""

    def __init__(self, message, best=None, error=None):
        super().__init__(message)
        self.best = best
        self.error = error


class DomainError(MacroQEDError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class OrderTooLarge(MacroQEDError, ValueError):
    """Requested special-function order exceeds the documented limit."""


class SizeLimit(MacroQEDError, ValueError):
    """Matrix or photon-number size exceeds the documented limit."""


class TabulationRange(MacroQEDError, ValueError):
    """Frequency outside the range supported by tabulated data."""


class CutoffInvalid(MacroQEDError, ValueError):
    """Mode-sum cutoff function violates its required properties."""


class SingularBlock(MacroQEDError):
    """Degenerate matrix block in a unitary embedding."""


class InvalidCovariance(MacroQEDError, ValueError):
    """Covariance matrix violates the uncertainty relation."""


class ConfigError(MacroQEDError, ValueError):
    """Invalid CLI / sweep configuration; message names the offending key."""


class RecipeUnknown(MacroQEDError, KeyError):
    """Requested reproduction recipe does not exist."""


class ValidityWarning(UserWarning):
    """Result used outside its documented validity range."""


class BornConvergenceWarning(UserWarning):
    """Second Born order is not small against the first."""


class RegimeWarning(UserWarning):
    """Parameters only marginally satisfy a regime assumption."""


class RegimeAmbiguousWarning(UserWarning):
    """No asymptotic regime dominates; all candidates reported."""


class StiffnessWarning(UserWarning):
    """Extreme parameter ratios; time integration may be inaccurate."""
