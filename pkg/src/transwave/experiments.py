"""End-to-end experiments: static-solver convergence, interface flux convergence and the paired regime study."""

import math
from typing import Any, Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np
from loguru import logger
from rich.progress import Progress

from transwave import constants
from transwave.config import SystemConfig, validate_config, with_values
from transwave.core.jax.pytrees import TreeClass, autoinit, frozen_field
from transwave.core.misc import log_spaced_grid, observed_orders
from transwave.decay.fit import classify_decay
from transwave.errors import AnalysisError
from transwave.evolution.initialization import default_initial_state
from transwave.evolution.modal import decay_window, modal_basis, modal_initial_state
from transwave.evolution.simulate import EnergyTrace, simulate
from transwave.fem.mesh import Mesh
from transwave.fem.state import StateVector
from transwave.generator.operator import GeneratorOperator, apply_generator, discretize, static_solve
from transwave.spectrum.eigen import eigenvalues
from transwave.spectrum.resolvent import resolvent_sweep, valid_band
from transwave.typing import Interval

_GAUSS_POINTS = np.array([-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0)])
_GAUSS_WEIGHTS = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])

# f(x, a, c1) evaluated with element-constant coefficients
ElementFunction = Callable[[jax.Array, jax.Array, jax.Array], jax.Array]


@autoinit
class ManufacturedSolution(TreeClass):
    """Static solution with zero velocities and smooth displacements satisfying all interface conditions.

    u = 1 − cos(πx/L₀) on (0, L₀), φ = 1 + cos(π(x − L₀)/(L − L₀)) on (L₀, L), y = ψ = sin(πx/L). Both
    chains are continuous at L₀ and have vanishing flux there, so the solution lies in the domain of the
    generator for any a₁, a₂.
    """

    L0: float = frozen_field()
    L: float = frozen_field()

    def u(self, x: jax.Array) -> jax.Array:
        left = 1.0 - jnp.cos(math.pi * x / self.L0)
        right = 1.0 + jnp.cos(math.pi * (x - self.L0) / (self.L - self.L0))
        return jnp.where(x <= self.L0, left, right)

    def u_xx(self, x: jax.Array) -> jax.Array:
        k_left, k_right = math.pi / self.L0, math.pi / (self.L - self.L0)
        left = k_left**2 * jnp.cos(k_left * x)
        right = -(k_right**2) * jnp.cos(k_right * (x - self.L0))
        return jnp.where(x <= self.L0, left, right)

    def y(self, x: jax.Array) -> jax.Array:
        return jnp.sin(math.pi * x / self.L)

    def y_xx(self, x: jax.Array) -> jax.Array:
        return -((math.pi / self.L) ** 2) * jnp.sin(math.pi * x / self.L)

    def forcing_w(self, x: jax.Array, a: jax.Array, c1: jax.Array) -> jax.Array:
        """−(a u_x)_x + c₁y"""
        return -a * self.u_xx(x) + c1 * self.y(x)

    def forcing_s(self, x: jax.Array, a: jax.Array, c1: jax.Array) -> jax.Array:
        """−y_xx + c₁u"""
        return -self.y_xx(x) + c1 * self.u(x)


@autoinit
class ConvergenceStudy(TreeClass):
    """Errors over a sequence of mesh sizes with the observed orders between consecutive sizes."""

    #: Mean element size L/N of each mesh actually built (breakpoint alignment makes h_max jump between meshes).
    h_values: tuple[float, ...] = frozen_field()
    errors: tuple[float, ...] = frozen_field()
    orders: tuple[float, ...] = frozen_field()

    #: Relative residual ‖A_hU + F‖/‖F‖ per mesh size (static solves only).
    residuals: tuple[float, ...] = frozen_field(default=())

    @property
    def min_order(self) -> float:
        return min(self.orders) if self.orders else math.nan


def _element_gauss(mesh: Mesh) -> tuple[jax.Array, jax.Array]:
    """Gauss points (elements x 3) and their weights including the Jacobian."""
    lengths = mesh.element_lengths
    mids = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    points = mids[:, None] + 0.5 * lengths[:, None] * jnp.asarray(_GAUSS_POINTS)[None, :]
    weights = 0.5 * lengths[:, None] * jnp.asarray(_GAUSS_WEIGHTS)[None, :]
    return points, weights


def load_vector(mesh: Mesh, f: ElementFunction) -> jax.Array:
    """Interior load vector ∫ f φᵢ by 3-point Gauss quadrature on every element."""
    points, weights = _element_gauss(mesh)
    values = f(points, mesh.a_values[:, None], mesh.c1_values[:, None]) * weights
    shape_left = 0.5 * (1.0 - jnp.asarray(_GAUSS_POINTS))
    shape_right = 0.5 * (1.0 + jnp.asarray(_GAUSS_POINTS))
    element_idx = jnp.arange(mesh.num_elements)
    full = jnp.zeros(mesh.num_nodes)
    full = full.at[element_idx].add(values @ shape_left)
    full = full.at[element_idx + 1].add(values @ shape_right)
    return full[1:-1]


def l2_error(mesh: Mesh, interior_values: jax.Array, exact: Callable[[jax.Array], jax.Array]) -> float:
    """‖u_h − u‖_L² of a P1 function (clamped ends) against a closed-form function."""
    nodal = jnp.concatenate([jnp.zeros(1), interior_values, jnp.zeros(1)])
    points, weights = _element_gauss(mesh)
    shape_left = 0.5 * (1.0 - jnp.asarray(_GAUSS_POINTS))
    shape_right = 0.5 * (1.0 + jnp.asarray(_GAUSS_POINTS))
    discrete = nodal[:-1, None] * shape_left[None, :] + nodal[1:, None] * shape_right[None, :]
    return float(jnp.sqrt(jnp.sum(weights * (discrete - exact(points)) ** 2)))


def manufactured_forcing(gen: GeneratorOperator, solution: ManufacturedSolution) -> StateVector:
    """Discrete right-hand side F with −A_hU = F whose Galerkin solution approximates ``solution``."""
    n = gen.n
    zeros = jnp.zeros(n)
    q_w = gen.solve_mass(load_vector(gen.mesh, solution.forcing_w))
    q_s = gen.solve_mass(load_vector(gen.mesh, solution.forcing_s))
    return StateVector(p_w=zeros, p_s=zeros, q_w=q_w, q_s=q_s)


def _static_solution(cfg: SystemConfig, h: float) -> tuple[GeneratorOperator, StateVector, StateVector, ManufacturedSolution]:
    gen = discretize(cfg, h)
    solution = ManufacturedSolution(L0=cfg.L0, L=cfg.L)
    F = manufactured_forcing(gen, solution)
    return gen, F, static_solve(gen, F), solution


def static_convergence(cfg: SystemConfig, h_values: Sequence[float] = (0.04, 0.02, 0.01)) -> ConvergenceStudy:
    """L² error of the static solver against the manufactured solution over a sequence of mesh sizes.

    Args:
        cfg (SystemConfig): Configuration (damping and velocity coupling do not enter the static solution).
        h_values (Sequence[float], optional): Mesh sizes, coarse to fine. Defaults to (0.04, 0.02, 0.01).

    Returns:
        ConvergenceStudy: combined displacement errors of both chains, expected order 2.
    """
    cfg = validate_config(cfg)
    sizes, errors, residuals = [], [], []
    for h in h_values:
        gen, F, U, solution = _static_solution(cfg, h)
        sizes.append(gen.config.L / gen.mesh.num_elements)
        err_w = l2_error(gen.mesh, U.p_w, solution.u)
        err_s = l2_error(gen.mesh, U.p_s, solution.y)
        errors.append(math.sqrt(err_w**2 + err_s**2))
        residual = apply_generator(gen, U).pack() + F.pack()
        residuals.append(float(jnp.linalg.norm(residual) / jnp.linalg.norm(F.pack())))
        logger.debug(f"Static solve h={h}: L2 error {errors[-1]:.4e}, relative residual {residuals[-1]:.2e}")
    study = ConvergenceStudy(
        h_values=tuple(sizes),
        errors=tuple(errors),
        orders=tuple(observed_orders(sizes, errors)),
        residuals=tuple(residuals),
    )
    logger.info(f"Static solver orders {', '.join(f'{o:.3f}' for o in study.orders)}")
    return study


def interface_flux_jump(gen: GeneratorOperator, U: StateVector) -> float:
    """|a₁u_x(L₀⁻) − a₂φ_x(L₀⁺)| from the one-sided element slopes of the first chain at the interface."""
    nodal = jnp.concatenate([jnp.zeros(1), U.p_w, jnp.zeros(1)])
    nodes = gen.mesh.nodes
    i = gen.mesh.interface_index
    slope_left = (nodal[i] - nodal[i - 1]) / (nodes[i] - nodes[i - 1])
    slope_right = (nodal[i + 1] - nodal[i]) / (nodes[i + 1] - nodes[i])
    a = gen.mesh.a_values
    return float(jnp.abs(a[i - 1] * slope_left - a[i] * slope_right))


def flux_convergence(cfg: SystemConfig, h_values: Sequence[float] = (0.04, 0.02, 0.01)) -> ConvergenceStudy:
    """Interface flux jump of the static solution over a sequence of mesh sizes, expected order 1."""
    cfg = validate_config(cfg)
    sizes, jumps = [], []
    for h in h_values:
        gen, _, U, _ = _static_solution(cfg, h)
        sizes.append(gen.config.L / gen.mesh.num_elements)
        jumps.append(interface_flux_jump(gen, U))
    study = ConvergenceStudy(
        h_values=tuple(sizes),
        errors=tuple(jumps),
        orders=tuple(observed_orders(sizes, jumps)),
    )
    logger.info(f"Flux jump orders {', '.join(f'{o:.3f}' for o in study.orders)}")
    return study


def _polynomial_trace(
    gen: GeneratorOperator, dt: float, T: float | None, band: Interval, progress: Progress | None
) -> tuple[EnergyTrace, Interval, dict[str, Any]]:
    """Smooth modal data from ``band``, evaluated far into the tail through the modal basis.

    Without an explicit horizon the trace ends where the slow modes of the data have decayed, and the fit
    window covers the last decades before that. An explicit ``T`` keeps the same window length.
    """
    basis = modal_basis(gen)
    U0 = modal_initial_state(gen, band, basis=basis)
    if T is None:
        start, end = decay_window(basis, band)
    else:
        start, end = T / 10**constants.POLY_WINDOW_DECADES, T
    trace = simulate(gen, U0, dt, end, sampling="geometric", method="modal", basis=basis, progress=progress)
    window = (start, float(trace.times[-1]))
    details = {
        "propagation": "modal",
        "data_band": list(band),
        "horizon": float(trace.times[-1]),
        "fit_window": list(window),
    }
    return trace, window, details


def _regime_report(
    cfg: SystemConfig,
    h: float,
    dt: float,
    T: float | None,
    lambdas: jax.Array,
    polynomial: bool,
    progress: Progress | None,
) -> dict[str, Any]:
    gen = discretize(cfg, h)
    spectrum = eigenvalues(gen)
    report: dict[str, Any] = {
        "a2": gen.config.a2,
        "regime": gen.regime,
        "spectral_abscissa": spectrum.spectral_abscissa,
        "imag_axis_gap": spectrum.imag_axis_gap,
    }
    try:
        samples = resolvent_sweep(gen, lambdas, progress=progress, eigenfrequencies=np.imag(spectrum.eigenvalues))
        report["resolvent_exponent"] = samples.fitted_exponent
        report["resolvent_r_squared"] = samples.r_squared
        report["resolvent_abstained"] = samples.abstained
        report["predicted_energy_slope"] = samples.predicted_energy_slope
    except AnalysisError as e:
        logger.warning(f"Resolvent sweep for a2={gen.config.a2} failed: {e}")
        report["resolvent_exponent"] = None
        report["resolvent_error"] = str(e)

    if polynomial:
        band = (float(lambdas[0]), min(float(lambdas[-1]), valid_band(gen)[1]))
        trace, window, details = _polynomial_trace(gen, dt, T, band, progress)
        report.update(details)
        verdict = classify_decay(trace, window=window)
    else:
        horizon = constants.DEFAULT_T_EXPONENTIAL if T is None else T
        trace = simulate(gen, default_initial_state(gen), dt, horizon, progress=progress)
        verdict = classify_decay(trace)
    report["verdict"] = str(verdict)
    report["verdict_kind"] = verdict.kind
    report["verdict_value"] = verdict.value
    report["max_balance_residual"] = trace.max_balance_residual
    report["energy_nonincreasing"] = trace.is_nonincreasing()
    if verdict.exponential is not None:
        report["exponential_fit"] = verdict.exponential.to_dict()
    if verdict.polynomial is not None:
        report["polynomial_fit"] = verdict.polynomial.to_dict()
    elif polynomial:
        report["polynomial_error"] = f"no polynomial fit on the window {verdict.window}"
    return report


def run_regimes(
    cfg: SystemConfig,
    h: float = constants.DEFAULT_H,
    dt: float = constants.DEFAULT_DT,
    T_exponential: float = constants.DEFAULT_T_EXPONENTIAL,
    T_polynomial: float | None = None,
    a2_polynomial: float = constants.DEFAULT_A2_POLYNOMIAL,
    lambda_min: float = constants.DEFAULT_LAMBDA_MIN,
    lambda_max: float = constants.DEFAULT_LAMBDA_MAX,
    lambda_points: int = constants.DEFAULT_LAMBDA_POINTS,
    progress: Progress | None = None,
) -> dict[str, Any]:
    """Runs the paired a₂ = 1 versus a₂ ≠ 1 experiment.

    For each regime: spectrum, resolvent sweep with envelope exponent, simulation and decay classification.
    The a₂ = 1 run starts from the default initial data and samples uniformly up to ``T_exponential``. The
    a₂ ≠ 1 run starts from smooth modal data on the resolvent frequency range and evaluates the midpoint
    iterates through the modal basis, on geometric instants up to ``T_polynomial`` or, if omitted, up to
    the horizon where the slow modes of that data have decayed. All other coefficients are taken from ``cfg``.

    Returns:
        dict[str, Any]: ``{"regimes": {"a2_equal_1": ..., "a2_not_1": ...}, "consistent": bool}`` where
        ``consistent`` means an exponential verdict for a₂ = 1 and a polynomial one otherwise.
    """
    if a2_polynomial == 1.0:
        raise ValueError("a2_polynomial must differ from 1")
    lambdas = log_spaced_grid(lambda_min, lambda_max, lambda_points)
    exp_cfg = validate_config(with_values(cfg, a2=1.0))
    poly_cfg = validate_config(with_values(cfg, a2=a2_polynomial))

    logger.info("Regime a2 = 1")
    exp_report = _regime_report(exp_cfg, h, dt, T_exponential, lambdas, polynomial=False, progress=progress)
    logger.info(f"Regime a2 = {a2_polynomial}")
    poly_report = _regime_report(poly_cfg, h, dt, T_polynomial, lambdas, polynomial=True, progress=progress)
    consistent = exp_report["verdict_kind"] == "exponential" and poly_report["verdict_kind"] == "polynomial"
    logger.info(f"Regime study consistent with the stability dichotomy: {consistent}")
    return {
        "regimes": {"a2_equal_1": exp_report, "a2_not_1": poly_report},
        "consistent": consistent,
        "settings": {
            "h": h,
            "dt": dt,
            "T_exponential": T_exponential,
            "T_polynomial": poly_report.get("horizon", T_polynomial),
            "lambda_min": lambda_min,
            "lambda_max": lambda_max,
            "lambda_points": lambda_points,
        },
    }
