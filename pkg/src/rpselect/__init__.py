"""Robust model selection for Gaussian linear regression with Renyi pseudodistances."""
from .core import (Dataset, ModelSpec, Theta, c_alpha, gradient_h, hessian_h, objective_h,
                   rp_constants, vhat, vhat0)
from .criterion import (Criterion, CriterionValue, SandwichMatrices, aic, aicc, bic,
                        penalty_closed_form, penalty_trace, rp_nh, sandwich_matrices,
                        select_best)
from .estimator import FitOptions, FitResult, fit_mle, fit_mrpe
from .exceptions import (ConfigError, DegenerateWeightsError, InsufficientDataError,
                         InvalidInputError, NoValidModelError, ParseError, RpSelectError,
                         SingularDesignError)
from .hald import all_subsets, hald_candidates, load_hald
from .io import ingest_csv, write_csv
from .restricted import (NestedReport, ZeroConstraints, chi2_cdf, compare_nested,
                         constraint_jacobian, fit_rmrpe, overfit_eigenvalues, prob_select_restricted,
                         pstar_q)
from .simlab import SelectionTable, StudyConfig, generate_sample, polynomial_design, run_study

__version__ = "0.1.0"
