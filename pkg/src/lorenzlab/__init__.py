"""Lorenz-curve dynamics for diffusive wealth models.

The package solves the same evolution three ways and checks them against
each other: a finite-difference Fokker-Planck solver in wealth space, a
direct integrator for the transformed equation on the Lorenz curve, and a
pairwise-exchange agent simulation.  Closed forms for the Gaussian family
tie the three together.
"""

__version__ = "0.1.0"

from ._kernels import active_backend
from .errors import ConfigError, ConvexityError, StabilityError, ValidationError
from .fields import (
    DensityField,
    Domain,
    LorenzCurve,
    MetricSeries,
    SampledCDF,
    SpatialGrid,
    delta_density,
    gamma_density,
    gaussian_density,
    lognormal_density,
    tabulated_density,
    uniform_density,
)
from .coefficients import (
    CoefficientSpec,
    ConstantDiffusion,
    OUDrift,
    YardSaleDiffusion,
    ZeroDrift,
    eval_drift,
    eval_yardsale_diffusion,
    transformed_diffusion,
    transformed_drift_integral,
)
from .transforms import (
    cdf_from_density,
    density_from_lorenz,
    incomplete_first_moment,
    lorenz_from_density,
)
from .metrics import (
    gini_from_density,
    gini_from_lorenz,
    gini_rate_density,
    gini_rate_lorenz,
    hoover_from_lorenz,
)
from .analytic import (
    OUParams,
    erf_inv,
    gaussian_lorenz,
    heat_lorenz,
    heat_time_from_map_time,
    heat_to_quadratic_map,
    map_time_from_heat_time,
    ou_lorenz,
)
from .fpe import FpeRunConfig, run_fpe, stable_dt_bound, step_fpe
from .lorenz_pde import (
    LorenzRunConfig,
    pde_residual,
    run_lorenz,
    stable_dt_bound_lorenz,
    step_lorenz,
)
from .agents import (
    AgentPopulation,
    empirical_lorenz,
    ensemble_gini,
    run_agents,
    run_ensemble,
    sample_gini,
    transact,
)

__all__ = [
    "__version__",
    "active_backend",
    "ConfigError",
    "ConvexityError",
    "StabilityError",
    "ValidationError",
    "DensityField",
    "Domain",
    "LorenzCurve",
    "MetricSeries",
    "SampledCDF",
    "SpatialGrid",
    "delta_density",
    "gamma_density",
    "gaussian_density",
    "lognormal_density",
    "tabulated_density",
    "uniform_density",
    "CoefficientSpec",
    "ConstantDiffusion",
    "OUDrift",
    "YardSaleDiffusion",
    "ZeroDrift",
    "eval_drift",
    "eval_yardsale_diffusion",
    "transformed_diffusion",
    "transformed_drift_integral",
    "cdf_from_density",
    "density_from_lorenz",
    "incomplete_first_moment",
    "lorenz_from_density",
    "gini_from_density",
    "gini_from_lorenz",
    "gini_rate_density",
    "gini_rate_lorenz",
    "hoover_from_lorenz",
    "OUParams",
    "erf_inv",
    "gaussian_lorenz",
    "heat_lorenz",
    "heat_time_from_map_time",
    "heat_to_quadratic_map",
    "map_time_from_heat_time",
    "ou_lorenz",
    "FpeRunConfig",
    "run_fpe",
    "stable_dt_bound",
    "step_fpe",
    "LorenzRunConfig",
    "pde_residual",
    "run_lorenz",
    "stable_dt_bound_lorenz",
    "step_lorenz",
    "AgentPopulation",
    "empirical_lorenz",
    "ensemble_gini",
    "run_agents",
    "run_ensemble",
    "sample_gini",
    "transact",
]
