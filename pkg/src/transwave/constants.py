"""Default parameters and numerical tolerances.

This module collects the default demo configuration of the two-wave transmission system, the default
discretization settings used by the command line, and the tolerances shared by the analysis modules.
Lengths and times are in the same abstract unit as the domain length L.
"""

# Default demo configuration
DEFAULT_L0: float = 1.0
"""Interface position L₀."""

DEFAULT_L: float = 2.0
"""Total domain length L."""

DEFAULT_ALPHA: tuple[float, float, float, float] = (0.1, 0.2, 0.3, 0.4)
"""Breakpoints α₁..α₄ in (0, L₀). c₁ lives on (α₁, α₃), d₁ on (α₂, α₄)."""

DEFAULT_BETA: tuple[float, float, float, float] = (1.1, 1.2, 1.3, 1.4)
"""Breakpoints β₁..β₄ in (L₀, L). c₂ lives on (β₁, β₃), d₂ on (β₂, β₄)."""

DEFAULT_A1: float = 1.0
"""Squared wave speed of u on (0, L₀)."""

DEFAULT_A2: float = 1.0
"""Squared wave speed of φ on (L₀, L). 1 selects the exponential regime, anything else the polynomial one."""

DEFAULT_A2_POLYNOMIAL: float = 2.0
"""a₂ used for the polynomial-regime half of the paired regime experiment."""

DEFAULT_D1: float = 0.0
"""Damping magnitude on the first chain. Nonzero values leave the verified regime."""

DEFAULT_D2: float = 1.0
"""Damping magnitude on (β₂, β₄)."""

DEFAULT_C1: float = 0.5
"""Weak (displacement) coupling magnitude on (α₁, α₃)."""

DEFAULT_C2: float = 1.0
"""Strong (velocity) coupling magnitude on (β₁, β₃)."""

# Discretization defaults
DEFAULT_H: float = 0.02
"""Target element size."""

DEFAULT_DT: float = 0.01
"""Implicit midpoint time step."""

DEFAULT_T_EXPONENTIAL: float = 200.0
"""Simulation horizon for the a₂ = 1 regime."""

DEFAULT_T_POLYNOMIAL: float = 2000.0
"""Simulation horizon for the a₂ ≠ 1 regime (polynomial tails need long horizons)."""

DEFAULT_SAMPLE_EVERY: int = 10
"""Record the energy every this many steps (uniform sampling)."""

DEFAULT_GEOMETRIC_SAMPLES: int = 400
"""Number of recorded instants for geometric sampling."""

POLYNOMIAL_HORIZON_FACTOR: float = 10.0
"""An explicit horizon T given to the regime experiment applies to a₂ = 1; the a₂ ≠ 1 run gets this multiple."""

MODAL_DATA_EXPONENT: float = 3.2
"""Modal energy of the smooth a₂ ≠ 1 initial data decays like ω^(−MODAL_DATA_EXPONENT); above 3 means D(A) data."""

POLY_WINDOW_DECADES: float = 2.2
"""Length in decades of the spectrum-derived polynomial fit window."""

POLY_HORIZON_QUANTILE: float = 0.1
"""The polynomial window ends once all but this fraction of the excited modes have decayed."""

DEFAULT_LAMBDA_MIN: float = 1.0
"""Lower end of the resolvent frequency grid."""

DEFAULT_LAMBDA_MAX: float = 50.0
"""Upper end of the resolvent frequency grid."""

DEFAULT_LAMBDA_POINTS: int = 400
"""Number of log-spaced resolvent frequencies."""

# Tolerances and thresholds
BAND_SAFETY_FACTOR: float = 0.2
"""Resolved band upper limit is BAND_SAFETY_FACTOR·π/h."""

MIN_ENVELOPE_POINTS: int = 8
"""Minimum number of local maxima for a resolvent growth fit."""

ENVELOPE_BINS_PER_DECADE: int = 6
"""Log-frequency bins per decade; the growth fit uses the largest refined peak of each bin."""

PEAK_REFINE_MAXITER: int = 20
"""Iteration cap of the bounded scalar search that sharpens each resolvent peak."""

PEAK_REFINE_XTOL: float = 1e-10
"""Relative frequency tolerance of the peak search."""

ABSTAIN_NEAR_SINGULAR_FRACTION: float = 0.5
"""The growth fit abstains once more than this fraction of the envelope lies numerically on the spectrum."""

NEAR_SINGULAR_TOL: float = 1e-8
"""Relative tolerance for flagging a resolvent evaluation on the spectrum."""

IMAG_AXIS_TOL: float = 1e-9
"""Real parts with modulus below this count as on the imaginary axis."""

MAX_DENSE_DOF: int = 2000
"""Largest interior DOF count per chain for dense eigenvalue solves."""

COERCIVITY_MARGIN: float = 0.05
"""Relative margin below the threshold 1/C₀ under which |c₁| is flagged as tight."""

ENERGY_FLOOR: float = 1e-300
"""Energies below this are dropped from decay fits."""

MIN_FIT_SAMPLES: int = 20
"""Minimum number of samples in an exponential fit window."""

MIN_POLY_DECADES: float = 2.0
"""Minimum time span, in decades, of a polynomial fit window."""

TAIL_FRACTION: float = 0.6
"""Fraction of the trace, measured in log-time, used as the tail window by the classifier."""

R2_ACCEPT: float = 0.98
"""Minimum R² for a decay verdict."""

R2_MARGIN: float = 0.02
"""Minimum R² advantage of the winning decay model."""

MONOTONE_SLACK: float = 1e-12
"""Relative slack for the nonincreasing-energy check."""

VERSION: str = "0.1.0"
"""Package version, recorded in every output header."""
