"""Perturbation of centrally symmetric densities.

For a density ``f`` symmetric about the origin, a scalar distribution
function ``G`` with ``G(-x) = 1 - G(x)`` and an odd function ``w``, the
function ``2 f(y) G(w(y))`` is again a density. If ``Y ~ f`` and
``X ~ G`` independently, then ``Z = Y`` when ``X < w(Y)`` and ``Z = -Y``
otherwise has that density, and every even function of ``Z`` has the same
law as the corresponding function of ``Y``.
"""

from dataclasses import dataclass, field, replace
import csv
from typing import Callable

import numpy as np
from scipy import special as sp

from .exceptions import DomainError, SymmetryError

__all__ = [
    "PerturbationSpec",
    "SymmetryReport",
    "check_symmetry",
    "perturbed_logpdf",
    "perturbed_pdf",
    "perturbed_sample",
    "BetaDemoParams",
    "beta_demo_spec",
    "beta_demo_logpdf",
    "DEMO_PRESETS",
    "density_grid",
    "write_density_grid",
]


@dataclass(frozen=True)
class SymmetryReport:
    """Largest violations of the symmetry hypotheses found on probe points."""

    odd_violation: float
    cdf_violation: float
    base_violation: float
    worst_y: np.ndarray
    tol: float

    @property
    def passed(self):
        return max(self.odd_violation, self.cdf_violation, self.base_violation) <= self.tol


@dataclass(frozen=True)
class PerturbationSpec:
    """Components ``(f, G, w)`` of a perturbed density in dimension ``dim``.

    Callables are vectorized over a leading axis: ``base_logpdf`` and
    ``odd_fn`` map an ``(n, dim)`` array to ``(n,)``, ``skew_cdf`` acts
    elementwise and ``base_sampler(rng, n)`` returns ``(n, dim)`` draws.
    ``X ~ G`` is drawn by ``skew_sampler(rng, n)`` when given, else by
    inversion through ``skew_ppf``.
    """

    base_logpdf: Callable
    base_sampler: Callable | None
    skew_cdf: Callable
    odd_fn: Callable
    dim: int
    skew_ppf: Callable | None = None
    skew_sampler: Callable | None = None
    report: SymmetryReport | None = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError("dim must be a positive integer")

    def checked(self, rng, probes=64, tol=1e-10):
        """Copy of this perturbation carrying a :class:`SymmetryReport`."""
        return replace(self, report=check_symmetry(self, probes, tol, rng))


def _rows(y, dim):
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != dim:
        raise DomainError(f"expected trailing dimension {dim}, got {y.shape[-1]}")
    return y.reshape(-1, dim), y.shape[:-1]


def check_symmetry(spec, probes=64, tol=1e-10, rng=None):
    """Probe ``w(-y) = -w(y)``, ``G(-x) = 1 - G(x)`` and ``f(-y) = f(y)``.

    The origin is always among the probes, so a constant offset in ``w`` is
    caught there. The returned report never raises.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    y = np.vstack([np.zeros(spec.dim), 2.0 * rng.standard_normal((probes - 1, spec.dim))])
    x = np.concatenate([[0.0], 3.0 * rng.standard_normal(probes - 1)])
    with np.errstate(all="ignore"):
        odd = np.abs(np.asarray(spec.odd_fn(y)) + np.asarray(spec.odd_fn(-y)))
        cdf = np.abs(np.asarray(spec.skew_cdf(x)) + np.asarray(spec.skew_cdf(-x)) - 1.0)
        base = np.abs(np.exp(spec.base_logpdf(y)) - np.exp(spec.base_logpdf(-y)))
    odd = np.where(np.isnan(odd), np.inf, odd)
    worst = int(np.argmax(odd))
    return SymmetryReport(
        float(odd.max()), float(np.nanmax(cdf)), float(np.nanmax(base)), y[worst].copy(), tol
    )


def _require_symmetric(spec):
    if spec.report is not None and not spec.report.passed:
        r = spec.report
        raise SymmetryError(
            "perturbation components failed the symmetry check "
            f"(odd {r.odd_violation:.3g}, cdf {r.cdf_violation:.3g}, base {r.base_violation:.3g})"
        )


def perturbed_logpdf(y, spec):
    """``log 2 + log f(y) + log G(w(y))``, ``-inf`` where ``G(w(y)) = 0``."""
    _require_symmetric(spec)
    rows, shape = _rows(y, spec.dim)
    with np.errstate(divide="ignore"):
        out = np.log(2.0) + spec.base_logpdf(rows) + np.log(spec.skew_cdf(spec.odd_fn(rows)))
    out = np.asarray(out, dtype=float).reshape(shape)
    return out[()] if out.ndim == 0 else out


def perturbed_pdf(y, spec):
    return np.exp(perturbed_logpdf(y, spec))


def perturbed_sample(spec, rng, size=None):
    """Sign-flip draws: one base draw and one ``X`` draw per output."""
    _require_symmetric(spec)
    if spec.base_sampler is None:
        raise DomainError("spec has no base sampler")
    n = 1 if size is None else int(size)
    y = np.asarray(spec.base_sampler(rng, n), dtype=float).reshape(n, spec.dim)
    if spec.skew_sampler is not None:
        x = np.asarray(spec.skew_sampler(rng, n), dtype=float)
    elif spec.skew_ppf is not None:
        x = np.asarray(spec.skew_ppf(rng.random(n)), dtype=float)
    else:
        raise DomainError("spec needs skew_sampler or skew_ppf to draw X ~ G")
    z = np.where((x < spec.odd_fn(y))[:, None], y, -y)
    return z[0] if size is None else z


@dataclass(frozen=True)
class BetaDemoParams:
    """Shapes ``a, b`` of the two rescaled symmetric Beta factors and the
    coefficients of ``w(y) = sin(p1 y1 + p2 y2) / (1 + cos(q1 y1 + q2 y2))``."""

    a: float
    b: float
    p1: float = 0.0
    p2: float = 0.0
    q1: float = 0.0
    q2: float = 0.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError("Beta shapes a and b must be positive")


def _beta_base_logpdf(a, b):
    log_c = (a + b - 1.0) * np.log(4.0) + sp.betaln(a, a) + sp.betaln(b, b)

    def logpdf(y):
        y = np.asarray(y, dtype=float)
        inside = np.all(np.abs(y) < 1.0, axis=-1)
        ys = np.where(inside[..., None], y, 0.0)
        val = sp.xlog1py(a - 1.0, -ys[..., 0] ** 2) + sp.xlog1py(b - 1.0, -ys[..., 1] ** 2) - log_c
        return np.where(inside, val, -np.inf)

    return logpdf


def _beta_base_sampler(a, b):
    def sampler(rng, n):
        return np.column_stack([2.0 * rng.beta(a, a, n) - 1.0, 2.0 * rng.beta(b, b, n) - 1.0])

    return sampler


def beta_demo_spec(params):
    """Perturbation spec of the bivariate perturbed Beta example.

    ``G`` is the logistic distribution function. Where ``1 + cos(.) = 0``
    and the sine vanishes too, ``w`` is taken as 0.
    """
    p = params

    def odd_fn(y):
        y = np.asarray(y, dtype=float)
        num = np.sin(p.p1 * y[..., 0] + p.p2 * y[..., 1])
        den = 1.0 + np.cos(p.q1 * y[..., 0] + p.q2 * y[..., 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            w = num / den
        return np.where(np.isnan(w), 0.0, w)

    return PerturbationSpec(
        base_logpdf=_beta_base_logpdf(p.a, p.b),
        base_sampler=_beta_base_sampler(p.a, p.b),
        skew_cdf=sp.expit,
        odd_fn=odd_fn,
        dim=2,
        skew_ppf=sp.logit,
    )


def beta_demo_logpdf(y, params):
    """Log-density of the perturbed Beta example; ``-inf`` off ``(-1, 1)^2``."""
    return perturbed_logpdf(y, beta_demo_spec(params))


# illustrative values chosen for this package, not taken from any published figure
DEMO_PRESETS = {
    "mild": BetaDemoParams(2.0, 2.0, 1.0, 0.5, 0.5, 0.5),
    "ridge": BetaDemoParams(3.0, 1.5, 3.0, -2.0, 1.0, 0.0),
    "wave": BetaDemoParams(1.5, 1.5, 6.0, 6.0, 2.0, 2.0),
    "corner": BetaDemoParams(1.2, 1.2, 4.0, 4.0, 0.0, 0.0),
    "peaked": BetaDemoParams(6.0, 6.0, 8.0, -3.0, 3.0, 1.0),
    "flat": BetaDemoParams(1.0, 1.0, 2.0, 1.0, 1.5, -1.5),
}


def density_grid(params, n=101):
    """Evaluate the perturbed Beta density on an ``n x n`` interior grid.

    Returns an ``(n*n, 3)`` array of ``y1, y2, density`` rows.
    """
    g = np.linspace(-1.0, 1.0, n + 2)[1:-1]
    y1, y2 = np.meshgrid(g, g, indexing="ij")
    pts = np.column_stack([y1.ravel(), y2.ravel()])
    dens = np.exp(beta_demo_logpdf(pts, params))
    return np.column_stack([pts, dens])


def write_density_grid(path_or_file, grid):
    rows = [("y1", "y2", "density")] + [tuple(f"{v:.10g}" for v in r) for r in grid]
    if hasattr(path_or_file, "write"):
        csv.writer(path_or_file, lineterminator="\n").writerows(rows)
    else:
        with open(path_or_file, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
