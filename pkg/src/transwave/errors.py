"""Exception and warning types raised by transwave.

Every error derives from :class:`TranswaveError`. The four groups map to the command-line exit codes:
configuration and analysis errors are usage problems (exit 2), discretization and solver errors are
numerical failures.
"""


class TranswaveError(Exception):
    """Base class of all transwave errors."""


# configuration
class ConfigError(TranswaveError, ValueError):
    """The physical configuration or its file representation is invalid."""


class OrderingViolation(ConfigError):
    """The breakpoint chain 0 < α₁ < … < α₄ < L₀ < β₁ < … < β₄ < L is broken."""


class NonpositiveCoefficient(ConfigError):
    """A wave speed is not positive or a damping magnitude is negative."""


class CoercivityViolation(ConfigError):
    """|c₁| is not below the reciprocal Poincaré constant of (0, L₀)."""


class NonpositiveLength(ConfigError):
    """A length that must be positive is not."""


class OutOfDomain(ConfigError):
    """A position lies outside [0, L]."""


class ParseError(ConfigError):
    """A configuration document could not be parsed or holds a value of the wrong type."""


class UnknownKey(ConfigError):
    """A configuration document or override names a key that does not exist."""


class MissingKey(ConfigError):
    """A configuration document lacks required keys."""


# discretization
class DiscretizationError(TranswaveError):
    """The discrete problem could not be set up."""


class HTooCoarse(DiscretizationError, ValueError):
    """The requested mesh size is not positive."""


class DimensionMismatch(DiscretizationError, ValueError):
    """A state vector does not match the discretization it is used with."""


class IndefiniteGram(DiscretizationError):
    """The energy Gram matrix is not positive definite."""


class BoundaryMismatch(DiscretizationError, ValueError):
    """Initial data violate the Dirichlet conditions at x=0 or x=L."""


class InterfaceMismatch(DiscretizationError, ValueError):
    """Initial data are discontinuous across the interface L₀."""


# linear algebra
class SolverError(TranswaveError):
    """A linear or eigenvalue solve failed."""


class SingularSystem(SolverError):
    """The static problem −A_h U = F is singular."""


class SolveFailure(SolverError):
    """A time-stepping solve produced non-finite values."""


class ConvergenceFailure(SolverError):
    """An iterative eigensolver did not converge."""


class SizeExceeded(SolverError):
    """The problem is too large for a dense eigenvalue solve."""


# post-processing
class AnalysisError(TranswaveError):
    """Samples are insufficient for the requested fit or sweep."""


class BandTooNarrow(AnalysisError):
    """Too few resolvent envelope points inside the resolved frequency band."""


class WindowTooSmall(AnalysisError):
    """A fit window holds too few samples or spans too little time."""


class EnergyUnderflow(AnalysisError):
    """Too many energies in the fit window are below the floating-point floor."""


class NonStandardRegimeWarning(UserWarning):
    """d₁ ≠ 0: the configuration is accepted but the stability claims are unverified."""


class NearSingularWarning(UserWarning):
    """A resolvent was evaluated (numerically) on the spectrum."""
