"""Transport-collapse discretization of 1-d scalar conservation laws on
CDF-valued data, with exact one-dimensional Wasserstein diagnostics."""

__version__ = "0.1.0"

from .measures import (
    MixtureState,
    ParticleQuantiles,
    StepCdf,
    as_step_cdf,
    cdf_from_particles,
    eval_cdf,
    generalized_inverse,
    midpoint_nodes,
    mixture_quantile,
    moment,
    particles_from_cdf,
    tail_moment,
)
from .wasserstein import w1_via_cdf, weak_convergence_gap, wp_cdf, wp_particles
from .fluxes import FluxModel, flux_from_file, make_builtin, make_tabulated
from .scheme import (
    NonClassicalError,
    RawPositions,
    SchemeState,
    classical_characteristics,
    collapse,
    evolve_sh,
    exact_rarefaction_cdf,
    exact_shock_cdf,
    sh_as_cdf,
    sh_trajectory,
    th_step,
    transport,
)
from .viscous import (
    SmoothedCdf,
    evolve_viscous,
    heat_resample,
    smoothed_cdf_eval,
    smoothed_quantile,
    viscous_step,
    viscous_trajectory,
)
from .entropy import BumpFamily, entropy_residual
from .config import ConfigError, ExperimentConfig, build_initial, parse_config
from .experiments import ResultTable, emit_csv, run_experiment

__all__ = [
    "__version__",
    "MixtureState",
    "ParticleQuantiles",
    "StepCdf",
    "as_step_cdf",
    "cdf_from_particles",
    "eval_cdf",
    "generalized_inverse",
    "midpoint_nodes",
    "mixture_quantile",
    "moment",
    "particles_from_cdf",
    "tail_moment",
    "w1_via_cdf",
    "weak_convergence_gap",
    "wp_cdf",
    "wp_particles",
    "FluxModel",
    "flux_from_file",
    "make_builtin",
    "make_tabulated",
    "NonClassicalError",
    "RawPositions",
    "SchemeState",
    "classical_characteristics",
    "collapse",
    "evolve_sh",
    "exact_rarefaction_cdf",
    "exact_shock_cdf",
    "sh_as_cdf",
    "sh_trajectory",
    "th_step",
    "transport",
    "SmoothedCdf",
    "evolve_viscous",
    "heat_resample",
    "smoothed_cdf_eval",
    "smoothed_quantile",
    "viscous_step",
    "viscous_trajectory",
    "BumpFamily",
    "entropy_residual",
    "ConfigError",
    "ExperimentConfig",
    "build_initial",
    "parse_config",
    "ResultTable",
    "emit_csv",
    "run_experiment",
]
