"""Simulation checks of distributional identities for the normalized Brownian excursion."""

from .experiments import (ExperimentConfig, IdentitySuiteReport, run_convergence, run_simulate,
                          run_verify)
from .functionals import (FunctionalSample, brownian_from_excursion, evaluate, gauss_identity_residual,
                          gs_statistic, inverse_integral, l2_integral, min_bruteforce, min_functional,
                          prop_statistic, weighted_area, weighted_bm_integral)
from .occupation import (OccupationProfile, jeulin_path, jeulin_values, occupation_profile,
                         path_max)
from .paths import PathGrid, sample_brownian_bridge, sample_excursion
from .rng import RngStream
from .stats import (MomentSummary, TestReport, ks_one_sample_normal, ks_two_sample,
                    moment_summary, normal_cdf)

__version__ = "0.1.0"
