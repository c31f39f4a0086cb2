"""Scikit-learn style wrapper around the skew-t regression fit."""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .inference import Dataset, FitConfig, fit_mle, loglik_terms

__all__ = ["SkewTRegressor"]


class SkewTRegressor(RegressorMixin, BaseEstimator):
    """Linear regression with multivariate skew-t errors, fitted by maximum likelihood.

    Parameters
    ----------
    fit_intercept : bool, default=True
    nu_floor : {"auto", None} or float, default="auto"
        Lower bound on the degrees of freedom; ``"auto"`` uses
        ``d / (n - 1) + 0.01``.
    max_iter : int, default=500
    grad_tol : float, default=1e-6
        Relative tolerance on the projected gradient.
    nu_init : float, default=10.0

    Attributes
    ----------
    coef_ : ndarray of shape (n_features, n_targets)
    intercept_ : ndarray of shape (n_targets,)
    omega_ : ndarray of shape (n_targets, n_targets)
    alpha_ : ndarray of shape (n_targets,)
    nu_ : float
    result_ : FitResult

    Notes
    -----
    ``predict`` returns the location ``intercept_ + X coef_``, not the
    conditional mean; the two differ by the mean of the skew-t error.
    ``score`` returns the mean log-likelihood per observation.
    """

    def __init__(self, fit_intercept=True, nu_floor="auto", max_iter=500, grad_tol=1e-6,
                 nu_init=10.0):
        self.fit_intercept = fit_intercept
        self.nu_floor = nu_floor
        self.max_iter = max_iter
        self.grad_tol = grad_tol
        self.nu_init = nu_init

    def _dataset(self, X, y):
        y = np.asarray(y, dtype=float)
        if X is None:
            return Dataset.from_arrays(y, None, intercept=True)
        X = check_array(X)
        return Dataset.from_arrays(y, X, intercept=self.fit_intercept)

    def fit(self, X, y):
        """Fit the model. ``X`` may be ``None`` for an intercept-only model."""
        y = check_array(y, ensure_2d=False)
        self._y_1d = y.ndim == 1
        if X is not None:
            X = check_array(X)
            if X.shape[0] != y.shape[0]:
                raise ValueError("X and y have different numbers of rows")
            self.n_features_in_ = X.shape[1]
        else:
            self.n_features_in_ = 0
        data = self._dataset(X, y)
        cfg = FitConfig(max_iter=self.max_iter, grad_tol=self.grad_tol, nu_floor=self.nu_floor,
                        nu_init=self.nu_init)
        res = fit_mle(data, cfg)
        beta = res.beta
        if X is None or self.fit_intercept:
            self.intercept_ = beta[0].copy()
            self.coef_ = beta[1:].copy()
        else:
            self.intercept_ = np.zeros(beta.shape[1])
            self.coef_ = beta.copy()
        self.omega_ = res.omega_mat
        self.alpha_ = res.alpha
        self.nu_ = res.nu
        self.result_ = res
        return self

    def predict(self, X=None):
        check_is_fitted(self, "result_")
        if X is None:
            if self.n_features_in_:
                raise ValueError("X is required for a model fitted with covariates")
            out = np.atleast_2d(self.intercept_)
        else:
            X = check_array(X)
            if X.shape[1] != self.n_features_in_:
                raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
            out = self.intercept_ + X @ self.coef_
        return out[:, 0] if self._y_1d else out

    def score(self, X, y, sample_weight=None):
        """Mean log-likelihood of ``(X, y)`` under the fitted model."""
        check_is_fitted(self, "result_")
        y = check_array(y, ensure_2d=False)
        data = self._dataset(X, y)
        terms = loglik_terms(self.result_.theta_hat, data)
        return float(np.average(terms, weights=sample_weight))
