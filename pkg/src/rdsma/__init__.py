"""Model-assisted prevalence estimation for respondent-driven sampling."""

from .netcore import (ClassTable, NetStats, Network, class_table,
                      cross_alters_all, cross_group_ties,
                      edgewise_shared_partners, gwesp, load_network,
                      mixing_and_ratios, node_cross_alters, save_network)
from .netgen import (AnnealSchedule, ErgmSpec, InfeasibleSpecError, MixingSpec,
                     Tetrad, anneal_to_crossties, ergm_mcmc_sample,
                     gen_bernoulli_mixing, reed_molloy, sample_valid_tetrad,
                     solve_mixing_cells, swap_randomize)
from .ergmfit import (MtpleFit, TetradSample, fit_mtple, mean_value_to_natural,
                      sample_tetrads, tetradic_gradient, tetradic_loglik)
from .rdssim import (ClassCounts, RdsSample, SamplingDesign,
                     estimate_x_from_referrals, load_rds_csv, run_rds,
                     save_rds_csv, select_seeds, simulate_class_counts,
                     validate_rds_sample)
from .estimate import (MaConfig, MaResult, WeightTable, child_rng,
                       design_estimates, hajek, initial_weights, ma_estimate,
                       naive_mean, realize_population, update_weights,
                       vh_estimate)
from .bootstrap import (BootstrapConfig, BootstrapResult, parametric_bootstrap,
                        summarize)
from .harness import (StudyResult, StudySpec, parse_study_config,
                      run_sensitivity_N, run_study)

__version__ = "0.1.0"
