import math
import warnings

import jax.numpy as jnp
from loguru import logger

from transwave import constants
from transwave.core.jax.pytrees import TreeClass, autoinit, frozen_field
from transwave.errors import (
    CoercivityViolation,
    ConfigError,
    NonStandardRegimeWarning,
    NonpositiveCoefficient,
    NonpositiveLength,
    OrderingViolation,
    OutOfDomain,
)
from transwave.typing import Breakpoints4, CoefficientName, Interval, Regime

COEFFICIENT_NAMES: tuple[CoefficientName, ...] = ("d1", "c1", "d2", "c2")


@autoinit
class PiecewiseCoefficient(TreeClass):
    """A coefficient that equals ``value`` on the open interval ``support`` and vanishes elsewhere."""

    #: Closed support interval (left, right). The endpoints themselves evaluate to 0.
    support: Interval = frozen_field()

    #: Magnitude on the support.
    value: float = frozen_field()

    def __call__(self, x: float) -> float:
        left, right = self.support
        return self.value if left < x < right else 0.0

    def on_element(self, left: float, right: float) -> float:
        """Value of the coefficient on the element (left, right), evaluated at its midpoint.

        Exact whenever the support endpoints are mesh nodes.
        """
        return self(0.5 * (left + right))


@autoinit
class SystemConfig(TreeClass):
    """Physical configuration of the locally damped, locally coupled two-wave transmission system.

    The first chain carries u on (0, L₀) and φ on (L₀, L), the second chain y on (0, L₀) and ψ on (L₀, L).
    Both are clamped at x=0 and x=L and continuous across L₀. Defaults are the demo configuration.
    """

    #: Interface position L₀.
    L0: float = frozen_field(default=constants.DEFAULT_L0)

    #: Total length L > L₀.
    L: float = frozen_field(default=constants.DEFAULT_L)

    #: Squared wave speed of u.
    a1: float = frozen_field(default=constants.DEFAULT_A1)

    #: Squared wave speed of φ.
    a2: float = frozen_field(default=constants.DEFAULT_A2)

    #: Damping magnitude of u on (α₂, α₄).
    d1: float = frozen_field(default=constants.DEFAULT_D1)

    #: Damping magnitude of φ on (β₂, β₄).
    d2: float = frozen_field(default=constants.DEFAULT_D2)

    #: Displacement coupling magnitude on (α₁, α₃).
    c1: float = frozen_field(default=constants.DEFAULT_C1)

    #: Velocity coupling magnitude on (β₁, β₃).
    c2: float = frozen_field(default=constants.DEFAULT_C2)

    #: Ascending breakpoints α₁..α₄ in (0, L₀).
    alpha: Breakpoints4 = frozen_field(default=constants.DEFAULT_ALPHA)

    #: Ascending breakpoints β₁..β₄ in (L₀, L).
    beta: Breakpoints4 = frozen_field(default=constants.DEFAULT_BETA)

    def coefficient(self, which: CoefficientName) -> PiecewiseCoefficient:
        """Piecewise-constant coefficient d₁, c₁, d₂ or c₂ of this configuration."""
        a, b = self.alpha, self.beta
        supports: dict[str, tuple[Interval, float]] = {
            "d1": ((a[1], a[3]), self.d1),
            "c1": ((a[0], a[2]), self.c1),
            "d2": ((b[1], b[3]), self.d2),
            "c2": ((b[0], b[2]), self.c2),
        }
        if which not in supports:
            raise ValueError(f"Unknown coefficient '{which}', expected one of {COEFFICIENT_NAMES}")
        support, value = supports[which]
        return PiecewiseCoefficient(support=support, value=value)

    def wave_speed_squared(self, x: float) -> float:
        """Stiffness weight a(x) of the first chain: a₁ left of L₀, a₂ right of it."""
        return self.a1 if x < self.L0 else self.a2

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """All geometric breakpoints including the domain ends, in the order they must ascend."""
        return (0.0, *self.alpha, self.L0, *self.beta, self.L)

    @property
    def min_gap(self) -> float:
        points = self.breakpoints
        return min(right - left for left, right in zip(points[:-1], points[1:]))

    @property
    def regime(self) -> Regime:
        return "a2_equal_1" if self.a2 == 1.0 else "a2_not_1"


@autoinit
class ValidatedConfig(SystemConfig):
    """A configuration for which every invariant of :class:`SystemConfig` has been checked."""

    #: Poincaré constant of (0, L₀).
    C0: float = frozen_field()

    #: 1 − |c₁|·C₀, positive by validation.
    coercivity_margin: float = frozen_field()

    #: True if d₁ = 0, the case for which the stability claims are established.
    standard_regime: bool = frozen_field(default=True)

    #: Sign of the velocity coupling (+1, -1, or 0 when c₂ = 0).
    c2_sign: int = frozen_field(default=1)


def poincare_constant(L0: float) -> float:
    """Smallest C₀ with ∫|f|² ≤ C₀ ∫|f'|² for all f ∈ H₀¹(0, L₀).

    This is the reciprocal of the first Dirichlet eigenvalue (π/L₀)² of −d²/dx² on (0, L₀).

    Args:
        L0 (float): Interval length.

    Returns:
        float: (L₀/π)²
    """
    if not L0 > 0:
        raise NonpositiveLength(f"Poincaré constant needs a positive length, got L0={L0}")
    return (L0 / math.pi) ** 2


def discrete_poincare_constant(L0: float, num_elements: int = 200, extrapolate: bool = False) -> float:
    """Poincaré constant from the smallest eigenvalue of the tridiagonal Dirichlet Laplacian on (0, L₀).

    Cross-check for :func:`poincare_constant`. With ``extrapolate`` the eigenvalues at h and h/2 are
    combined by Richardson extrapolation, removing the O(h²) error term.

    Args:
        L0 (float): Interval length.
        num_elements (int, optional): Number of uniform elements. Defaults to 200.
        extrapolate (bool, optional): Apply Richardson extrapolation. Defaults to False.

    Returns:
        float: Approximation of (L₀/π)².
    """
    if not L0 > 0:
        raise NonpositiveLength(f"Poincaré constant needs a positive length, got L0={L0}")
    if num_elements < 2:
        raise ValueError(f"Need at least two elements, got {num_elements}")

    def smallest_eigenvalue(n: int) -> float:
        h = L0 / n
        size = n - 1
        laplacian = (2.0 * jnp.eye(size) - jnp.eye(size, k=1) - jnp.eye(size, k=-1)) / h**2
        return float(jnp.linalg.eigvalsh(laplacian)[0])

    lam = smallest_eigenvalue(num_elements)
    if extrapolate:
        lam = (4.0 * smallest_eigenvalue(2 * num_elements) - lam) / 3.0
    return 1.0 / lam


def _check_finite(raw: SystemConfig):
    values = [raw.L0, raw.L, raw.a1, raw.a2, raw.d1, raw.d2, raw.c1, raw.c2, *raw.alpha, *raw.beta]
    if not all(math.isfinite(float(v)) for v in values):
        raise ConfigError(f"Configuration contains non-finite values: {raw.to_dict()}")
    if len(raw.alpha) != 4 or len(raw.beta) != 4:
        raise ConfigError(f"alpha and beta need exactly 4 breakpoints, got {len(raw.alpha)} and {len(raw.beta)}")


def _check_ordering(raw: SystemConfig):
    if not raw.L0 > 0:
        raise NonpositiveLength(f"Interface position must be positive, got L0={raw.L0}")
    names = ["0", "alpha1", "alpha2", "alpha3", "alpha4", "L0", "beta1", "beta2", "beta3", "beta4", "L"]
    points = raw.breakpoints
    for idx in range(len(points) - 1):
        if not points[idx] < points[idx + 1]:
            raise OrderingViolation(
                f"Breakpoint chain broken: {names[idx]}={points[idx]} must be < {names[idx + 1]}={points[idx + 1]}"
            )


def _check_coefficients(raw: SystemConfig):
    if not raw.a1 > 0 or not raw.a2 > 0:
        raise NonpositiveCoefficient(f"Wave speeds must be positive, got a1={raw.a1}, a2={raw.a2}")
    if raw.d1 < 0 or raw.d2 < 0:
        raise NonpositiveCoefficient(f"Damping magnitudes must be nonnegative, got d1={raw.d1}, d2={raw.d2}")


def validate_config(raw: SystemConfig) -> ValidatedConfig:
    """Check every invariant of a configuration and seal it.

    Validating an already validated configuration returns it unchanged.

    Args:
        raw (SystemConfig): Configuration to check.

    Returns:
        ValidatedConfig: Sealed configuration with the Poincaré constant and coercivity margin recorded.
    """
    if isinstance(raw, ValidatedConfig):
        return raw
    _check_finite(raw)
    _check_ordering(raw)
    _check_coefficients(raw)

    C0 = poincare_constant(raw.L0)
    threshold = 1.0 / C0
    if abs(raw.c1) >= threshold:
        raise CoercivityViolation(f"|c1|={abs(raw.c1)} must be below 1/C0={threshold:.6g} (C0={C0:.6g})")
    margin = 1.0 - abs(raw.c1) * C0
    if margin < constants.COERCIVITY_MARGIN:
        logger.warning(f"|c1|={abs(raw.c1)} is within {margin:.2%} of the coercivity threshold {threshold:.6g}")

    standard_regime = raw.d1 == 0.0
    if not standard_regime:
        message = f"d1={raw.d1} != 0: configuration accepted, but the stability claims are not established for it"
        logger.warning(message)
        warnings.warn(message, NonStandardRegimeWarning, stacklevel=2)
    if raw.c1 == 0.0 or raw.c2 == 0.0 or raw.d2 == 0.0:
        logger.info(f"Degenerate coefficients (c1={raw.c1}, c2={raw.c2}, d2={raw.d2}): outside the stabilized regime")

    return ValidatedConfig(
        **raw.to_dict(),
        C0=C0,
        coercivity_margin=margin,
        standard_regime=standard_regime,
        c2_sign=int(math.copysign(1, raw.c2)) if raw.c2 != 0 else 0,
    )


def coefficient_at(cfg: SystemConfig, which: CoefficientName, x: float) -> float:
    """Evaluate d₁, c₁, d₂ or c₂ at a position.

    Args:
        cfg (SystemConfig): Configuration.
        which (CoefficientName): Coefficient name.
        x (float): Position in [0, L].

    Returns:
        float: Coefficient value, 0 outside its (open) support.
    """
    if not 0.0 <= x <= cfg.L:
        raise OutOfDomain(f"Position {x} lies outside [0, {cfg.L}]")
    return cfg.coefficient(which)(x)


def default_config(a2: float = constants.DEFAULT_A2) -> SystemConfig:
    """Demo configuration; ``a2`` selects the regime."""
    return SystemConfig(a2=a2)


def validated_default(a2: float = constants.DEFAULT_A2) -> ValidatedConfig:
    return validate_config(default_config(a2=a2))


def with_values(cfg: SystemConfig, **values) -> SystemConfig:
    """Copy of ``cfg`` as a plain :class:`SystemConfig` with some fields replaced (re-validate afterwards)."""
    data = {name: getattr(cfg, name) for name in SystemConfig().field_names()}
    unknown = set(values) - set(data)
    if unknown:
        raise ConfigError(f"Unknown configuration fields: {sorted(unknown)}")
    data.update(values)
    return SystemConfig(**data)
