"""Heat content of Gaussian processes: exact evaluators, Monte Carlo estimators
and small-time asymptotics for intervals and balls."""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticPrediction,
    borell_tis_tail,
    moment_condition_diag,
    predict_rhc,
    predict_shc_1d,
    predict_shc_multid,
    quasi_helix_mu_bounds,
    scaled_covariance_diag,
    shc_upper_bound_multid,
)
from .covariance import (
    BiFractionalBM,
    BrownianMotion,
    FractionalOU,
    OrnsteinUhlenbeck,
    PolySum,
    PowerLog,
    ProcessSpec,
    TimeChangedBM,
    cov,
    cov_matrix,
    fou_variance,
    mu_closed_form,
    sigma_sq,
    slowly_varying_bounds,
    variance,
)
from .errors import *  # noqa: F401,F403
from .estimators import (
    EstimateWithCI,
    HeatCurve,
    bridge_correct_exit,
    bridge_crossing_probability,
    estimate_mu,
    estimate_rhc,
    estimate_shc,
    estimate_sup_Y,
    rhc_error_1d,
    rhc_exact_1d,
    run_mu,
    run_shc,
)
from .geometry import (
    Ball,
    Interval,
    delta_D,
    inner_volume,
    sample_uniform,
    surface_area,
    surface_area_inner,
    volume,
)
from .ratefit import RateFitResult, fit_power_law, ratio_convergence
from .sampler import (
    CholeskyFactor,
    PathEnsemble,
    TimeGrid,
    build_factor,
    iter_ensemble,
    load_ensemble,
    sample_ensemble,
    sample_ou_exact,
    save_ensemble,
)
