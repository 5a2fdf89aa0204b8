"""Simulation, quasi-likelihood estimation, and Monte Carlo verification
for scalar diffusions observed through local means."""

from .estimate import EstimateResult, estimate_augmented, estimate_means_only
from .exact_oracle import GaussianObsModel, build_base_cov, exact_llr, exact_mle, log_density
from .experiments import ExperimentConfig, ExperimentReport, default_verify_configs, run_experiment
from .measures import (
    VCoefficients,
    WeightMeasure,
    cum_mass,
    local_mean,
    measure_from_spec,
    measure_to_spec,
    tail_mass,
    v_coefficients,
    v_coefficients_quadrature,
)
from .models import REGISTRY, DiffusionModel, get_model, info_integrand, path_information
from .quasi_score import (
    TriKMatrix,
    augmented_block_cov,
    interior_block_cov,
    quadratic_form,
    quasi_loglik,
    score_and_info,
    obs_score_and_info,
    solve_tridiagonal,
    xi,
    xi_dtheta,
    xi_obs,
)
from .simulate import (
    Block,
    BlockSet,
    PathGrid,
    augment,
    gaussian_coupled_increments,
    observe,
    simulate_path,
)

__version__ = "0.1.0"
