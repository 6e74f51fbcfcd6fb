"""Kernel-density estimates of general multivariate association (A-hat)."""

from .composite import SemipartialRequest, semipartial_association
from .correction import apply_small_sample_correction, calibrate_correction
from .density import (ModelParams, RankedTable, loo_log_density_group, loo_log_lik_alt,
                      loo_log_lik_null, rank_transform)
from .estimator import EstimatorConfig, FitResult, estimate_association, fit_alt, fit_null
from .inference import TestResult, permutation_test
from .table import (AssociationError, DataTable, GroupingError, SampleTooSmallError,
                    UnknownFamilyError, UnsupportedGroupingError, VariableGrouping)

__all__ = [
    "AssociationError", "DataTable", "EstimatorConfig", "FitResult", "GroupingError",
    "ModelParams", "RankedTable", "SampleTooSmallError", "SemipartialRequest", "TestResult",
    "UnknownFamilyError", "UnsupportedGroupingError", "VariableGrouping",
    "apply_small_sample_correction", "calibrate_correction", "estimate_association",
    "fit_alt", "fit_null", "loo_log_density_group", "loo_log_lik_alt", "loo_log_lik_null",
    "permutation_test", "rank_transform", "semipartial_association",
]
