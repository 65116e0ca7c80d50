"""Exception types shared across the package."""


class ChainsqError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ChainsqError, ValueError):
    pass


class NotStable(ChainsqError):
    """Drift matrix has an eigenvalue with non-negative real part."""

    def __init__(self, max_real: float, message: str | None = None):
        self.max_real = max_real
        super().__init__(message or f"drift is not Hurwitz (max Re eig = {max_real:.3e})")


class InvalidState(ChainsqError, ValueError):
    """Covariance matrix violates the uncertainty relation."""


class InvalidSpec(ChainsqError, ValueError):
    pass


class Unphysical(ChainsqError, ValueError):
    """Bath correlations exceed |m| <= sqrt(n(n+1))."""


class OutOfValidityDomain(ChainsqError, ValueError):
    pass


class Unstable(ChainsqError, ValueError):
    """Two-tone drive with |G+| <= |G-| has no stable effective bath."""


class SingularW(ChainsqError):
    pass


class TruncationInsufficient(ChainsqError):
    pass


class NoConvergence(ChainsqError):
    pass


class ConfigInvalid(ChainsqError, ValueError):
    pass
