import jax

# all computations run in double precision
jax.config.update("jax_enable_x64", True)

from transwave import constants  # noqa: E402
from transwave.config import (  # noqa: E402
    PiecewiseCoefficient,
    SystemConfig,
    ValidatedConfig,
    coefficient_at,
    default_config,
    discrete_poincare_constant,
    poincare_constant,
    validate_config,
    validated_default,
    with_values,
)
from transwave.conversion.json import (  # noqa: E402
    config_from_dict,
    config_to_dict,
    export_json,
    export_json_str,
    parse_config,
    read_report,
    write_config,
    write_report,
)
from transwave.core.jax.pytrees import (  # noqa: E402
    TreeClass,
    autoinit,
    field,
    frozen_field,
)
from transwave.core.physics.metrics import dissipation_rate, energy, energy_components, normalize_by_energy  # noqa: E402
from transwave.decay.fit import DecayFit, DecayVerdict, classify_decay, fit_exponential, fit_polynomial  # noqa: E402
from transwave.errors import (  # noqa: E402
    AnalysisError,
    ConfigError,
    DiscretizationError,
    NearSingularWarning,
    NonStandardRegimeWarning,
    SolverError,
    TranswaveError,
)
from transwave.evolution.initialization import (  # noqa: E402
    InitialProfiles,
    default_initial_state,
    default_profiles,
    project_initial_data,
)
from transwave.evolution.modal import ModalBasis, decay_window, modal_basis, modal_initial_state  # noqa: E402
from transwave.evolution.simulate import EnergyTrace, simulate  # noqa: E402
from transwave.evolution.stepping import MidpointStepper, make_stepper, step_midpoint  # noqa: E402
from transwave.experiments import flux_convergence, run_regimes, static_convergence  # noqa: E402
from transwave.fem.assembly import GramMatrix, SystemMatrices, assemble_matrices, energy_gram  # noqa: E402
from transwave.fem.mesh import Mesh, build_mesh  # noqa: E402
from transwave.fem.state import StateVector  # noqa: E402
from transwave.generator.operator import (  # noqa: E402
    GeneratorOperator,
    apply_generator,
    build_generator,
    discretize,
    dissipation_identity,
    graph_norm,
    static_solve,
)
from transwave.spectrum.eigen import SpectrumResult, abscissa_study, eigenpair_diagnostics, eigenvalues  # noqa: E402
from transwave.spectrum.resolvent import ResolventSamples, resolvent_norm, resolvent_sweep  # noqa: E402
from transwave.utils.logger import Logger  # noqa: E402

__version__ = constants.VERSION

__all__ = [
    "constants",
    # config
    "PiecewiseCoefficient",
    "SystemConfig",
    "ValidatedConfig",
    "coefficient_at",
    "default_config",
    "discrete_poincare_constant",
    "poincare_constant",
    "validate_config",
    "validated_default",
    "with_values",
    # conversion
    "config_from_dict",
    "config_to_dict",
    "export_json",
    "export_json_str",
    "parse_config",
    "read_report",
    "write_config",
    "write_report",
    # core
    "TreeClass",
    "autoinit",
    "field",
    "frozen_field",
    "dissipation_rate",
    "energy",
    "energy_components",
    "normalize_by_energy",
    # decay
    "DecayFit",
    "DecayVerdict",
    "classify_decay",
    "fit_exponential",
    "fit_polynomial",
    # errors
    "AnalysisError",
    "ConfigError",
    "DiscretizationError",
    "NearSingularWarning",
    "NonStandardRegimeWarning",
    "SolverError",
    "TranswaveError",
    # evolution
    "InitialProfiles",
    "default_initial_state",
    "default_profiles",
    "project_initial_data",
    "ModalBasis",
    "decay_window",
    "modal_basis",
    "modal_initial_state",
    "EnergyTrace",
    "simulate",
    "MidpointStepper",
    "make_stepper",
    "step_midpoint",
    # experiments
    "flux_convergence",
    "run_regimes",
    "static_convergence",
    # fem
    "GramMatrix",
    "SystemMatrices",
    "assemble_matrices",
    "energy_gram",
    "Mesh",
    "build_mesh",
    "StateVector",
    # generator
    "GeneratorOperator",
    "apply_generator",
    "build_generator",
    "discretize",
    "dissipation_identity",
    "graph_norm",
    "static_solve",
    # spectrum
    "SpectrumResult",
    "abscissa_study",
    "eigenpair_diagnostics",
    "eigenvalues",
    "ResolventSamples",
    "resolvent_norm",
    "resolvent_sweep",
    # utils
    "Logger",
]
