"""Exception types shared across the package."""


class WeylringError(Exception):
    """Base class for all package-specific errors."""


class EPProximityError(WeylringError):
    """Parameter point is too close to an exceptional point.

    Left eigenvectors diverge at an EP (self-orthogonality), so the
    biorthogonal eigensystem is refused when the discriminant magnitude
    drops below 1e-12 * kappa**2.
    """


class TrackingAmbiguityError(WeylringError):
    """Consecutive eigenvectors overlap too weakly to track mode labels.

    Raised when both candidate overlaps fall below 1/sqrt(2); the path
    discretization must be refined.
    """


class PoleProximityError(WeylringError):
    """Spherical-connection stencil requested too close to a pole."""


class RefineGridError(WeylringError):
    """A plaquette phase reached pi; the surface grid must be refined."""


class DegenerateBasisError(WeylringError):
    """Fitted eigenvectors are nearly parallel; the 2x2 change of basis
    to the initial condition is ill-conditioned."""


class ConvergenceError(WeylringError):
    """Optimizer failed to converge. Carries the best result found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PostselectionError(WeylringError):
    """Single-excitation block has (numerically) vanishing weight."""


class TruncationError(WeylringError):
    """Population reached the top of the truncated Fock ladder."""


class NoTransitionError(WeylringError):
    """No invariant jump found in a sweep."""


class FitQualityError(WeylringError):
    """Model fit residual exceeded the acceptance threshold."""


class ConfigError(WeylringError):
    """Run configuration is invalid (unknown key, missing field, bad value)."""
