import io
import math

import numpy as np
import pytest
from scipy import integrate

from skewell.diagnostics import (
    NORMAL_FIT,
    SKEW_T_FIT,
    adjusted_intercept,
    density_curve,
    healy_points,
    healy_svg,
    kolmogorov_band,
    plotting_positions,
    residuals,
    write_healy_csv,
)
from skewell.exceptions import DomainError
from skewell.inference import Dataset, fit_mle
from skewell.skew_t import StParams, st_moments, st_sample


@pytest.fixture(scope="module")
def st4_fit():
    p = StParams([0, 0, 0, 0], np.eye(4) + 0.3, [2.0, -1.0, 0.5, 0.0], 6.0)
    y = st_sample(p, np.random.default_rng(0), 1500)
    data = Dataset.from_arrays(y)
    return data, fit_mle(data)


def test_plotting_positions_and_band():
    assert np.allclose(plotting_positions(4), [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(plotting_positions(4, "healy"), [0.25, 0.5, 0.75, 1.0])
    with pytest.raises(DomainError):
        plotting_positions(3, "other")
    assert kolmogorov_band(100) == pytest.approx(1.63 / 10, abs=2e-3)


def test_healy_fitted_model_inside_band(st4_fit):
    data, fit = st4_fit
    series = healy_points(fit, data, SKEW_T_FIT)
    assert np.all(np.diff(series.observed) >= 0)
    assert np.all((series.observed >= 0) & (series.observed <= 1))
    assert series.max_deviation < kolmogorov_band(data.n)


def test_healy_normal_fit_on_heavy_tails():
    y = np.random.default_rng(1).standard_t(3, size=(2000, 2))
    series = healy_points(None, y, NORMAL_FIT)
    assert series.family == NORMAL_FIT
    assert series.max_deviation > kolmogorov_band(2000)


def test_healy_single_point_and_errors():
    p = StParams.scalar(0.0, 1.0, 1.0, 4.0)
    series = healy_points(p, np.array([0.7]))
    assert series.nominal[0] == 0.5 and 0 <= series.observed[0] <= 1
    with pytest.raises(DomainError):
        healy_points(p, np.array([]))
    with pytest.raises(DomainError):
        healy_points(p, np.array([1.0, 2.0]), family="other")


def test_residuals_and_density_curve():
    rng = np.random.default_rng(2)
    x = rng.normal(size=200)
    y = 1.0 + x + st_sample(StParams.scalar(0.0, 1.0, -3.0, 5.0), rng, 200)[:, 0]
    data = Dataset.from_arrays(y, x)
    fit = fit_mle(data)
    assert np.allclose(residuals(fit, data)[:, 0], y - fit.beta[0, 0] - fit.beta[1, 0] * x)
    grid, dens = density_curve(fit, np.linspace(-40, 40, 40_001))
    assert integrate.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-3)
    adj = adjusted_intercept(fit, data)
    assert adj[0] == pytest.approx(fit.beta[0, 0] + st_moments(fit.params, order=1).mean[0])
    # the adjusted intercept estimates the mean response at x = 0
    assert abs(adj[0] - np.mean(y - fit.beta[1, 0] * x)) < 0.1


def test_density_curve_requires_scalar(st4_fit):
    with pytest.raises(DomainError):
        density_curve(st4_fit[1], np.zeros(3))


def test_exports():
    series = healy_points(StParams.scalar(0.0, 1.0, 0.0, 5.0), np.array([-1.0, 0.2, 3.0]))
    buf = io.StringIO()
    write_healy_csv(buf, series)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "nominal,observed" and len(lines) == 4
    assert float(lines[1].split(",")[0]) == pytest.approx(1 / 6)
    svg = healy_svg(series)
    assert svg.startswith("<svg") and svg.count("<circle") == 3
    assert math.isfinite(series.max_deviation)
