"""Exception and warning types shared across the package."""


class VortexSheetError(Exception):
    """Base class for errors raised by this package."""


class AliasError(VortexSheetError):
    """Energy outside the retained spectral modes exceeded the allowed fraction."""


class DomainError(VortexSheetError, ValueError):
    """The radial profile leaves the admissible domain (1 + 2*eta <= 0)."""


class TooCloseError(VortexSheetError, ValueError):
    """Evaluation point too close to the interface for plain trapezoidal quadrature."""


class InadmissibleError(VortexSheetError):
    """Bifurcation hypotheses fail at the requested parameters."""

    def __init__(self, message: str, reason: str = ""):
        super().__init__(message)
        self.reason = reason or message


class NewtonDivergence(VortexSheetError):
    """Newton iteration did not reach the requested tolerance."""

    def __init__(self, message: str, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class StepTooLarge(VortexSheetError):
    """Continuation predictor residual exceeds the safeguard."""


class BlowupError(VortexSheetError):
    """Time integration produced non-finite or excessively large coefficients."""


class QuadratureWarning(UserWarning):
    """Shifted-grid quadrature disagrees with the doubled-grid result."""


class StepWarning(UserWarning):
    """Finite-difference step failed the Richardson consistency check."""
