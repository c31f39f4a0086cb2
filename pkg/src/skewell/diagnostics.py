"""Goodness-of-fit diagnostics for fitted skew-t regressions.

Healy-type plots compare sorted model probabilities of the Mahalanobis
statistics ``Q_i`` with uniform plotting positions. Under a skew-t model
``Q_i / d ~ F(d, nu)``; under a normal model ``Q_i ~ chi2_d``.
"""

from dataclasses import dataclass
import csv

import numpy as np
from scipy import special as sp
from scipy.stats import kstwobign

from ._linalg import chol_upper, quad_form
from .exceptions import DomainError
from .inference import Dataset, FitResult
from .skew_t import StParams, st_moments, st_pdf

__all__ = [
    "NORMAL_FIT",
    "SKEW_T_FIT",
    "HealySeries",
    "healy_points",
    "residuals",
    "density_curve",
    "adjusted_intercept",
    "kolmogorov_band",
    "write_healy_csv",
    "healy_svg",
]

NORMAL_FIT = "NormalFit"
SKEW_T_FIT = "SkewTFit"


@dataclass(frozen=True, eq=False)
class HealySeries:
    nominal: np.ndarray
    observed: np.ndarray
    family: str

    def __post_init__(self):
        if self.nominal.shape != self.observed.shape:
            raise DomainError("nominal and observed lengths differ")

    @property
    def max_deviation(self):
        return float(np.max(np.abs(self.observed - self.nominal)))


def plotting_positions(n, rule="hazen"):
    """``(i - 1/2) / n`` for ``rule="hazen"``, ``i / n`` for ``rule="healy"``."""
    i = np.arange(1, n + 1)
    if rule == "hazen":
        return (i - 0.5) / n
    if rule == "healy":
        return i / n
    raise DomainError(f"unknown plotting-position rule {rule!r}")


def kolmogorov_band(n, level=0.01):
    """Asymptotic Kolmogorov half-width; ``1.63 / sqrt(n)`` at the 1% level."""
    return float(kstwobign.isf(level) / np.sqrt(n))


def residuals(fit, data):
    """``u_i = y_i - beta_hat' x_i``."""
    return data.y - data.x @ fit.beta


def _normal_mle(data):
    beta, *_ = np.linalg.lstsq(data.x, data.y, rcond=None)
    res = data.y - data.x @ beta
    return res, res.T @ res / data.n


def healy_points(model, data, family=SKEW_T_FIT, positions="hazen"):
    """Sorted model probabilities of ``Q_i`` against plotting positions.

    Parameters
    ----------
    model : FitResult, StParams or None
        A regression fit, or fixed skew-t parameters whose ``xi`` is the
        common location. Ignored for ``family="NormalFit"``, which uses the
        Gaussian maximum likelihood regression fit of ``data``.
    data : Dataset or array_like
        An array is read as i.i.d. rows with an intercept-only design.
    family : {"SkewTFit", "NormalFit"}
    positions : {"hazen", "healy"}
    """
    if not isinstance(data, Dataset):
        y = np.asarray(data, dtype=float)
        if y.size == 0:
            raise DomainError("healy_points needs at least one observation")
        y = y[:, None] if y.ndim == 1 else y
        if family == NORMAL_FIT or not isinstance(model, StParams):
            data = Dataset.from_arrays(y)
        else:
            data = None
            u = y - model.xi
    if data is not None and data.n == 0:
        raise DomainError("healy_points needs at least one observation")
    if family == NORMAL_FIT:
        u, cov = _normal_mle(data)
        q = quad_form(u, chol_upper(0.5 * (cov + cov.T)))
        prob = sp.chdtr(u.shape[1], q)
    elif family == SKEW_T_FIT:
        if isinstance(model, FitResult):
            u = residuals(model, data)
            params = model.params
        elif isinstance(model, StParams):
            if data is not None:
                u = data.y - model.xi
            params = model
        else:
            raise DomainError("SkewTFit needs a FitResult or StParams")
        d = params.dim
        q = quad_form(u, params.chol)
        prob = sp.fdtr(d, params.nu, q / d)
    else:
        raise DomainError(f"unknown family {family!r}")
    observed = np.sort(prob)
    return HealySeries(plotting_positions(observed.size, positions), observed, family)


def density_curve(fit, grid):
    """Fitted error density on ``grid`` (location zero), for ``d = 1`` fits."""
    params = fit.params if isinstance(fit, FitResult) else fit
    if params.dim != 1:
        raise DomainError("density_curve is for scalar fits")
    grid = np.asarray(grid, dtype=float).ravel()
    dens = st_pdf(grid[:, None], StParams(np.zeros(1), params.omega_mat, params.alpha, params.nu))
    return grid, dens


def adjusted_intercept(fit, data=None):
    """``beta_0 + E(epsilon)`` for a fit whose design has an intercept column.

    The error mean is that of the fitted ``St(0, Omega, alpha, nu)``, which
    needs ``nu > 1``.
    """
    ic = 0 if data is None else data.intercept_col
    if ic is None:
        raise DomainError("design has no intercept column")
    mean = st_moments(fit.params, order=1).mean
    return fit.beta[ic] + mean


def write_healy_csv(path_or_file, series):
    rows = [("nominal", "observed")] + [
        (f"{a:.10g}", f"{b:.10g}") for a, b in zip(series.nominal, series.observed)
    ]
    if hasattr(path_or_file, "write"):
        csv.writer(path_or_file, lineterminator="\n").writerows(rows)
    else:
        with open(path_or_file, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)


def healy_svg(series, size=360, margin=30):
    """A static SVG scatter of the series with the identity line."""
    span = size - 2 * margin

    def px(v):
        return margin + span * v

    def py(v):
        return size - margin - span * v

    dots = "".join(
        f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2" />'
        for a, b in zip(series.nominal, series.observed)
    )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">'
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" stroke="black"/>'
        f'<line x1="{px(0)}" y1="{py(0)}" x2="{px(1)}" y2="{py(1)}" stroke="grey"/>'
        f'<g fill="black">{dots}</g>'
        f'<text x="{margin}" y="{margin - 8}" font-size="12">{series.family}</text>'
        "</svg>\n"
    )
