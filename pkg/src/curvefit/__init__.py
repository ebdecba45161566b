"""Curve fitting and regression analysis toolkit."""

__version__ = "0.1.0"

from .dataset import Dataset, complete_pairs, load_csv, save_csv
from .globalopt import OptimizeConfig, global_fit
from .impute import ImputeStrategy, impute
from .local import FitResult, LocalConfig, fit, rss
from .metrics import Metrics, model_analysis, residual_diagnostics
from .models import ModelSpec, builtin_models, default_init, evaluate, get_model, jacobian
from .regress import BasisSpec, design_matrix, lasso_fit, ols_fit, ridge_fit, select_model
from .smooth import SGConfig, savitzky_golay, sg_coefficients
from .stats import SummaryStats, summary_statistics
