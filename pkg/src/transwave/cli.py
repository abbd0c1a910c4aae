"""Command-line entry point.

``transwave <verb> [--config cfg.json] [--out dir] [--h H] [--dt DT] [--T T] [--set key=value ...]``

Exit codes: 0 on success, 1 if a stability invariant is violated by the computed results, 2 on usage,
configuration or analysis errors.
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import jax.numpy as jnp
from loguru import logger

from transwave import constants
from transwave.config import SystemConfig, ValidatedConfig, default_config, discrete_poincare_constant, validate_config
from transwave.conversion import gnuplot
from transwave.conversion.csv import (
    write_envelope_csv,
    write_resolvent_csv,
    write_snapshots,
    write_spectrum_csv,
    write_trace_csv,
    write_triplets,
)
from transwave.conversion.json import CONFIG_KEYS, header_lines, parse_config, write_report
from transwave.core.jax.pytrees import TreeClass, autoinit, frozen_field
from transwave.core.misc import log_spaced_grid
from transwave.decay.fit import classify_decay
from transwave.errors import ParseError, TranswaveError, UnknownKey
from transwave.evolution.initialization import default_initial_state
from transwave.evolution.simulate import EnergyTrace, simulate
from transwave.experiments import flux_convergence, run_regimes, static_convergence
from transwave.generator.operator import GeneratorOperator, discretize
from transwave.spectrum.eigen import eigenpair_diagnostics, eigenvalues
from transwave.spectrum.resolvent import resolvent_sweep
from transwave.typing import EigenMode, SamplingMode, Verb
from transwave.utils.logger import Logger

EXIT_OK = 0
EXIT_FINDING = 1
EXIT_USAGE = 2

VERBS: tuple[Verb, ...] = ("validate", "spectrum", "resolvent", "simulate", "decay", "static-solve", "poincare", "regimes")


@autoinit
class Command(TreeClass):
    """A parsed command-line invocation."""

    verb: Verb = frozen_field()
    config_path: str | None = frozen_field(default=None)
    output_dir: str | None = frozen_field(default=None)

    #: ``key=value`` overrides applied to the configuration before validation.
    overrides: tuple[str, ...] = frozen_field(default=())

    h: float = frozen_field(default=constants.DEFAULT_H)
    dt: float = frozen_field(default=constants.DEFAULT_DT)

    #: Horizon; None selects the regime default.
    T: float | None = frozen_field(default=None)

    sample_every: int = frozen_field(default=constants.DEFAULT_SAMPLE_EVERY)

    #: None selects uniform sampling for a₂ = 1 and geometric sampling otherwise.
    sampling: SamplingMode | None = frozen_field(default=None)

    lambda_min: float = frozen_field(default=constants.DEFAULT_LAMBDA_MIN)
    lambda_max: float = frozen_field(default=constants.DEFAULT_LAMBDA_MAX)
    lambda_points: int = frozen_field(default=constants.DEFAULT_LAMBDA_POINTS)
    tail_fraction: float = frozen_field(default=constants.TAIL_FRACTION)
    mode: EigenMode = frozen_field(default="dense")
    k: int = frozen_field(default=20)
    snapshots: bool = frozen_field(default=False)

    def settings(self) -> dict[str, Any]:
        """Numerical settings recorded in output headers (paths are left out so outputs stay reproducible)."""
        return {
            "verb": self.verb,
            "h": self.h,
            "dt": self.dt,
            "T": self.T,
            "sample_every": self.sample_every,
            "sampling": self.sampling,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "lambda_points": self.lambda_points,
            "tail_fraction": self.tail_fraction,
        }


def parse_override(expression: str) -> tuple[str, Any]:
    """Splits ``key=value`` and converts the value to the type of the configuration field.

    ``alpha`` and ``beta`` take comma-separated lists, all other keys a single number.
    """
    key, sep, text = expression.partition("=")
    key = key.strip()
    if not sep:
        raise ParseError(f"Override '{expression}' is not of the form key=value")
    if key not in CONFIG_KEYS:
        raise UnknownKey(f"Override names unknown configuration key '{key}'")
    try:
        if key in ("alpha", "beta"):
            value: Any = tuple(float(part) for part in text.split(","))
            if len(value) != 4:
                raise ParseError(f"Override '{key}' needs 4 comma-separated values, got {len(value)}")
        else:
            value = float(text)
    except ValueError as e:
        raise ParseError(f"Override '{key}' has invalid value '{text}'") from e
    return key, value


def resolve_config(cmd: Command) -> ValidatedConfig:
    """Loads the configuration file (or the demo configuration), applies overrides and validates."""
    raw: SystemConfig = default_config() if cmd.config_path is None else parse_config(cmd.config_path)
    for expression in cmd.overrides:
        key, value = parse_override(expression)
        raw = raw.aset(key, value)
    return validate_config(raw)


def _horizon(cmd: Command, cfg: ValidatedConfig) -> tuple[float, SamplingMode]:
    polynomial = cfg.regime == "a2_not_1"
    T = cmd.T
    if T is None:
        T = constants.DEFAULT_T_POLYNOMIAL if polynomial else constants.DEFAULT_T_EXPONENTIAL
    sampling: SamplingMode = cmd.sampling or ("geometric" if polynomial else "uniform")
    return T, sampling


def _stabilized(cfg: ValidatedConfig) -> bool:
    """Configurations for which no eigenvalue may sit on the imaginary axis."""
    return cfg.standard_regime and cfg.d2 > 0 and cfg.c1 != 0 and cfg.c2 != 0


def _run_validate(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    stats = {
        "C0": cfg.C0,
        "coupling_threshold": 1.0 / cfg.C0,
        "coercivity_margin": cfg.coercivity_margin,
        "regime": cfg.regime,
        "standard_regime": cfg.standard_regime,
        "c2_sign": cfg.c2_sign,
    }
    log.write(stats)
    write_report(log.path("validate.json"), stats, cfg, cmd.settings())
    return EXIT_OK


def _run_poincare(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    discrete = discrete_poincare_constant(cfg.L0, extrapolate=True)
    stats = {
        "L0": cfg.L0,
        "C0": cfg.C0,
        "C0_discrete": discrete,
        "relative_difference": abs(discrete - cfg.C0) / cfg.C0,
    }
    log.write(stats)
    write_report(log.path("poincare.json"), stats, cfg, cmd.settings())
    return EXIT_OK


def _run_spectrum(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    gen = discretize(cfg, cmd.h)
    result = eigenvalues(gen, mode=cmd.mode, k=cmd.k, with_vectors=True)
    diagnostics = eigenpair_diagnostics(gen, result)
    write_spectrum_csv(log.path("spectrum.csv"), result, cfg, cmd.settings())
    gnuplot.spectrum_script("spectrum.csv", log.path("spectrum.gp"), cfg, cmd.settings())
    stats = {
        "n": gen.n,
        "spectral_abscissa": result.spectral_abscissa,
        "imag_axis_gap": result.imag_axis_gap,
        "num_on_imaginary_axis": result.num_on_imaginary_axis,
        "max_eigen_residual": diagnostics.max_residual,
        "max_damping_mismatch": diagnostics.max_damping_mismatch,
    }
    log.write(stats)
    write_report(log.path("spectrum.json"), stats, cfg, cmd.settings())

    finding = result.spectral_abscissa > constants.IMAG_AXIS_TOL
    if _stabilized(cfg) and cmd.mode == "dense" and result.imag_axis_gap <= constants.IMAG_AXIS_TOL:
        finding = True
    if finding:
        logger.error(
            f"Stability invariant violated: abscissa={result.spectral_abscissa:.3g}, gap={result.imag_axis_gap:.3g}"
        )
        return EXIT_FINDING
    return EXIT_OK


def _run_resolvent(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    gen = discretize(cfg, cmd.h)
    grid = log_spaced_grid(cmd.lambda_min, cmd.lambda_max, cmd.lambda_points)
    samples = resolvent_sweep(gen, grid, progress=log.progress)
    write_resolvent_csv(log.path("resolvent.csv"), samples, cfg, cmd.settings())
    write_envelope_csv(log.path("envelope.csv"), samples, cfg, cmd.settings())
    gnuplot.resolvent_script(
        "resolvent.csv",
        log.path("resolvent.gp"),
        cfg,
        cmd.settings(),
        exponent=samples.fitted_exponent,
        envelope_csv="envelope.csv",
    )
    stats = {
        "fitted_exponent": samples.fitted_exponent,
        "r_squared": samples.r_squared,
        "abstained": samples.abstained,
        "num_envelope": samples.num_envelope,
        "num_envelope_near_singular": int(jnp.sum(samples.envelope_near_singular)),
        "num_fit_points": int(jnp.sum(samples.envelope_in_fit)),
        "band_max": samples.valid_band[1],
        "num_clipped": samples.num_clipped,
        "num_near_singular": int(jnp.sum(samples.near_singular)),
        "predicted_energy_slope": samples.predicted_energy_slope,
    }
    log.write(stats)
    write_report(log.path("resolvent.json"), stats, cfg, cmd.settings())
    return EXIT_OK


def _simulate(cmd: Command, cfg: ValidatedConfig, log: Logger) -> tuple[GeneratorOperator, EnergyTrace]:
    gen = discretize(cfg, cmd.h)
    T, sampling = _horizon(cmd, cfg)
    trace = simulate(
        gen,
        default_initial_state(gen),
        cmd.dt,
        T,
        sample_every=cmd.sample_every,
        sampling=sampling,
        keep_states=cmd.snapshots,
        progress=log.progress,
    )
    write_trace_csv(log.path("trace.csv"), trace, cfg, cmd.settings())
    gnuplot.trace_script("trace.csv", log.path("trace.gp"), cfg, cmd.settings(), loglog=sampling == "geometric")
    if cmd.snapshots:
        write_snapshots(log.path("snapshots"), trace, gen.mesh, cfg, cmd.settings())
    return gen, trace


def _trace_finding(trace: EnergyTrace) -> bool:
    tolerance = 1e-8 * max(trace.initial_energy, 1e-300)
    bad = not trace.is_nonincreasing() or trace.max_balance_residual > tolerance
    if bad:
        logger.error(f"Energy law violated: max balance residual {trace.max_balance_residual:.3g}")
    return bad


def _run_simulate(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    _, trace = _simulate(cmd, cfg, log)
    stats = {
        "num_steps": trace.num_steps,
        "E0": trace.initial_energy,
        "E_end": float(trace.energies[-1]),
        "initial_graph_norm": trace.initial_graph_norm,
        "max_balance_residual": trace.max_balance_residual,
        "nonincreasing": trace.is_nonincreasing(),
    }
    log.write(stats)
    write_report(log.path("simulate.json"), stats, cfg, cmd.settings())
    return EXIT_FINDING if _trace_finding(trace) else EXIT_OK


def _run_decay(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    _, trace = _simulate(cmd, cfg, log)
    verdict = classify_decay(trace, tail_fraction=cmd.tail_fraction)
    report = {
        "verdict": str(verdict),
        "kind": verdict.kind,
        "value": verdict.value,
        "window": list(verdict.window),
        "exponential": None if verdict.exponential is None else verdict.exponential.to_dict(),
        "polynomial": None if verdict.polynomial is None else verdict.polynomial.to_dict(),
    }
    log.write({"verdict": str(verdict), "value": verdict.value if verdict.value is not None else math.nan})
    write_report(log.path("decay.json"), report, cfg, cmd.settings())
    return EXIT_FINDING if _trace_finding(trace) else EXIT_OK


def _run_static(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    h_values = (2 * cmd.h, cmd.h, cmd.h / 2)
    study = static_convergence(cfg, h_values)
    flux = flux_convergence(cfg, h_values)
    gen = discretize(cfg, cmd.h)
    for name, matrix in gen.mats.as_dict().items():
        write_triplets(log.path(f"matrices/{name}.txt"), matrix, cfg, cmd.settings())
    report = {
        "h_values": list(study.h_values),
        "l2_errors": list(study.errors),
        "l2_orders": list(study.orders),
        "relative_residuals": list(study.residuals),
        "flux_jumps": list(flux.errors),
        "flux_orders": list(flux.orders),
    }
    log.write({"min_l2_order": study.min_order, "min_flux_order": flux.min_order})
    write_report(log.path("static.json"), report, cfg, cmd.settings())
    return EXIT_OK


def _run_regimes(cmd: Command, cfg: ValidatedConfig, log: Logger) -> int:
    a2_poly = cfg.a2 if cfg.a2 != 1.0 else constants.DEFAULT_A2_POLYNOMIAL
    report = run_regimes(
        cfg,
        h=cmd.h,
        dt=cmd.dt,
        T_exponential=cmd.T or constants.DEFAULT_T_EXPONENTIAL,
        T_polynomial=None if cmd.T is None else constants.POLYNOMIAL_HORIZON_FACTOR * cmd.T,
        a2_polynomial=a2_poly,
        lambda_min=cmd.lambda_min,
        lambda_max=cmd.lambda_max,
        lambda_points=cmd.lambda_points,
        progress=log.progress,
    )
    write_report(log.path("regimes.json"), report, cfg, cmd.settings())
    regimes = report["regimes"]
    log.write(
        {
            "a2_equal_1": regimes["a2_equal_1"]["verdict"],
            "a2_not_1": regimes["a2_not_1"]["verdict"],
            "consistent": report["consistent"],
        }
    )
    if any(r["spectral_abscissa"] > constants.IMAG_AXIS_TOL for r in regimes.values()):
        return EXIT_FINDING
    return EXIT_OK


_HANDLERS: dict[str, Callable[[Command, ValidatedConfig, Logger], int]] = {
    "validate": _run_validate,
    "poincare": _run_poincare,
    "spectrum": _run_spectrum,
    "resolvent": _run_resolvent,
    "simulate": _run_simulate,
    "decay": _run_decay,
    "static-solve": _run_static,
    "regimes": _run_regimes,
}


def run_command(cmd: Command) -> int:
    """Executes a command and maps the outcome to an exit status.

    Returns:
        int: 0 on success, 1 on an invariant-violation finding, 2 on usage, configuration or analysis errors.
    """
    if cmd.verb not in _HANDLERS:
        logger.error(f"Unknown verb '{cmd.verb}', expected one of {', '.join(VERBS)}")
        return EXIT_USAGE
    out = None if cmd.output_dir is None else Path(cmd.output_dir)
    log = Logger(out, experiment_name=cmd.verb)
    try:
        cfg = resolve_config(cmd)
        log.write_header(header_lines(cfg, cmd.settings()))
        return _HANDLERS[cmd.verb](cmd, cfg, log)
    except (TranswaveError, ValueError) as e:
        # invalid settings such as a negative horizon surface as plain ValueErrors
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_USAGE
    finally:
        log.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transwave",
        description="Stability laboratory for the locally damped, locally coupled two-wave transmission system.",
    )
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", dest="config_path", help="JSON configuration file (demo configuration if omitted)")
    parser.add_argument("--out", dest="output_dir", help="output directory (timestamped directory if omitted)")
    parser.add_argument("--h", type=float, default=constants.DEFAULT_H, help="target element size")
    parser.add_argument("--dt", type=float, default=constants.DEFAULT_DT, help="time step")
    parser.add_argument(
        "--T",
        type=float,
        default=None,
        help=(
            "simulation horizon (regime default if omitted); the regimes verb uses it for a2 = 1 and "
            f"{constants.POLYNOMIAL_HORIZON_FACTOR:g} times it for the a2 != 1 run"
        ),
    )
    parser.add_argument("--sample-every", type=int, default=constants.DEFAULT_SAMPLE_EVERY)
    parser.add_argument("--sampling", choices=("uniform", "geometric"), default=None)
    parser.add_argument("--lambda-min", type=float, default=constants.DEFAULT_LAMBDA_MIN)
    parser.add_argument("--lambda-max", type=float, default=constants.DEFAULT_LAMBDA_MAX)
    parser.add_argument("--lambda-points", type=int, default=constants.DEFAULT_LAMBDA_POINTS)
    parser.add_argument("--tail-fraction", type=float, default=constants.TAIL_FRACTION)
    parser.add_argument("--mode", choices=("dense", "iterative"), default="dense", help="eigenvalue mode")
    parser.add_argument("--k", type=int, default=20, help="eigenvalues in iterative mode")
    parser.add_argument("--snapshots", action="store_true", help="write nodal snapshots of the simulation")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration value (repeatable)",
    )
    return parser


def command_from_args(args: argparse.Namespace) -> Command:
    return Command(
        verb=args.verb,
        config_path=args.config_path,
        output_dir=args.output_dir,
        overrides=tuple(args.overrides),
        h=args.h,
        dt=args.dt,
        T=args.T,
        sample_every=args.sample_every,
        sampling=args.sampling,
        lambda_min=args.lambda_min,
        lambda_max=args.lambda_max,
        lambda_points=args.lambda_points,
        tail_fraction=args.tail_fraction,
        mode=args.mode,
        k=args.k,
        snapshots=args.snapshots,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    return run_command(command_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
