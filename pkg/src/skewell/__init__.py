"""Skew-elliptical distributions by perturbation of symmetric densities.

Submodules
----------
special          special functions (Student t, noncentral t, Owen's T)
elliptical       elliptical density generators, densities and samplers
perturb          generic symmetric-density perturbation and the Beta demo
skew_normal      multivariate and extended skew-normal
skew_elliptical  skew-PVII, skew-PII and their representations
skew_t           multivariate skew-t: density, CDF, moments, sampling
inference        skew-t regression likelihood, gradient, fit and profiles
estimator        scikit-learn style ``SkewTRegressor``
diagnostics      Healy plots, residuals and fitted density curves
cli              command-line front end
"""

__version__ = "0.1.0"

from .exceptions import (
    DomainError,
    FactorizationError,
    MomentError,
    NumericError,
    SkewellError,
    SymmetryError,
)
from .elliptical import DensityGenerator, EllipticalParams, elliptical_logpdf, elliptical_sample
from .skew_normal import SnParams, sn_cdf, sn_logpdf, sn_moments, sn_sample_conditioning
from .skew_elliptical import SkewEllipticalParams, se_logpdf, se_sample_conditioning
from .skew_t import StParams, st_cdf, st_logpdf, st_moments, st_pdf, st_sample
from .inference import Dataset, FitConfig, FitResult, ThetaParam, fit_mle, loglik, loglik_grad
from .estimator import SkewTRegressor
from .diagnostics import healy_points

__all__ = [
    "__version__",
    "SkewellError",
    "DomainError",
    "FactorizationError",
    "MomentError",
    "NumericError",
    "SymmetryError",
    "DensityGenerator",
    "EllipticalParams",
    "elliptical_logpdf",
    "elliptical_sample",
    "SnParams",
    "sn_logpdf",
    "sn_cdf",
    "sn_moments",
    "sn_sample_conditioning",
    "SkewEllipticalParams",
    "se_logpdf",
    "se_sample_conditioning",
    "StParams",
    "st_logpdf",
    "st_pdf",
    "st_cdf",
    "st_moments",
    "st_sample",
    "Dataset",
    "FitConfig",
    "FitResult",
    "ThetaParam",
    "fit_mle",
    "loglik",
    "loglik_grad",
    "SkewTRegressor",
    "healy_points",
]
