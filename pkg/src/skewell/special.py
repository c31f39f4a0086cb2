"""Scalar special functions used by the densities and gradients.

Gamma-family functions and the central incomplete beta / Student-t CDF are
thin validated wrappers over :mod:`scipy.special`. The noncentral t CDF and
Owen's T function are computed here.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import special as sp

from .exceptions import DomainError, NumericError

__all__ = [
    "Precision",
    "log_gamma",
    "digamma",
    "incomplete_beta",
    "normal_cdf",
    "log_normal_cdf",
    "student_t_cdf",
    "student_t_logcdf",
    "student_t_logpdf",
    "noncentral_t_cdf",
    "owen_t",
    "zeta1",
    "zeta2",
]

_LOG_SQRT_2 = 0.5 * math.log(2.0)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class Precision:
    """Truncation controls for series evaluations."""

    abs_tol: float = 1e-12
    max_iter: int = 500

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")


DEFAULT_PRECISION = Precision()


def _positive(name, x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError(f"{name} must be positive and finite")
    return x


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    return sp.gammaln(_positive("x", x))


def digamma(x):
    """Digamma function for ``x > 0``."""
    return sp.psi(_positive("x", x))


def incomplete_beta(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)``."""
    a = _positive("a", a)
    b = _positive("b", b)
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0) | ~(x <= 1)):
        raise DomainError("incomplete_beta requires 0 <= x <= 1")
    return sp.betainc(a, b, x)


def normal_cdf(x):
    return sp.ndtr(x)


def log_normal_cdf(x):
    return sp.log_ndtr(x)


def student_t_cdf(x, df):
    """Central Student-t distribution function ``T_1(x; df)``."""
    df = _positive("df", df)
    return sp.stdtr(df, x)


def student_t_logcdf(x, df):
    """``log T_1(x; df)``, accurate in both tails."""
    df = _positive("df", df)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        lower = np.log(sp.stdtr(df, np.minimum(x, 0.0)))
        upper = np.log1p(-sp.stdtr(df, -np.maximum(x, 0.0)))
    return np.where(x < 0, lower, upper)


def student_t_logpdf(x, df):
    df = _positive("df", df)
    x = np.asarray(x, dtype=float)
    return (
        sp.gammaln(0.5 * (df + 1.0))
        - sp.gammaln(0.5 * df)
        - 0.5 * np.log(np.pi * df)
        - 0.5 * (df + 1.0) * np.log1p(x * x / df)
    )


def _nct_upper(t, df, ncp, precision):
    # Poisson-mixture series for t >= 0, summed outwards from the modal term.
    lam = 0.5 * ncp * ncp
    base = sp.ndtr(-ncp)
    if t == 0.0:
        return base
    y = t * t / (df + t * t)
    half_df = 0.5 * df
    if lam == 0.0:
        return base + 0.5 * sp.betainc(0.5, half_df, y)

    log_lam = math.log(lam)
    log_q_scale = math.log(abs(ncp)) - _LOG_SQRT_2
    q_sign = 1.0 if ncp > 0 else -1.0

    def term(j):
        lp = -lam + j * log_lam - math.lgamma(j + 1.0)
        lq = log_q_scale - lam + j * log_lam - math.lgamma(j + 1.5)
        p_j = math.exp(lp)
        q_j = q_sign * math.exp(lq)
        value = p_j * sp.betainc(j + 0.5, half_df, y) + q_j * sp.betainc(j + 1.0, half_df, y)
        return value, p_j + abs(q_j)

    mode = int(lam)
    total = 0.0
    n_terms = 0
    for j in range(mode, -1, -1):
        value, weight = term(j)
        total += value
        n_terms += 1
        if weight < precision.abs_tol * max(abs(total), 1e-300) and j < mode:
            break
        if n_terms >= precision.max_iter:
            raise NumericError(
                "noncentral t series did not converge", partial=base + 0.5 * total
            )
    j = mode + 1
    while True:
        value, weight = term(j)
        total += value
        n_terms += 1
        if weight * sp.betainc(j + 0.5, half_df, y) < precision.abs_tol * max(abs(total), 1e-300):
            break
        if n_terms >= precision.max_iter:
            raise NumericError(
                "noncentral t series did not converge", partial=base + 0.5 * total
            )
        j += 1
    return min(max(base + 0.5 * total, 0.0), 1.0)


def _nct_scalar(x, df, ncp, precision):
    if x >= 0:
        return _nct_upper(x, df, ncp, precision)
    return 1.0 - _nct_upper(-x, df, -ncp, precision)


def noncentral_t_cdf(x, df, ncp, precision=DEFAULT_PRECISION):
    """Distribution function of the noncentral t with ``df`` degrees of freedom.

    Uses the Poisson-weighted incomplete-beta expansion (Lenth, AS 243) with
    the sum started at the modal Poisson term and extended in both
    directions until the term weight drops below ``precision.abs_tol``
    times the running sum.

    Raises
    ------
    NumericError
        If ``precision.max_iter`` terms do not reach the tolerance; the
        partially summed value is attached as ``err.partial``.
    """
    df = _positive("df", df)
    x, df, ncp = np.broadcast_arrays(np.asarray(x, float), df, np.asarray(ncp, float))
    if x.ndim == 0:
        return _nct_scalar(float(x), float(df), float(ncp), precision)
    out = np.empty(x.shape)
    for idx in np.ndindex(x.shape):
        out[idx] = _nct_scalar(float(x[idx]), float(df[idx]), float(ncp[idx]), precision)
    return out


def _owen_t_quad(h, a):
    # 0 <= a <= 1: Gauss-Legendre on the defining integral over [0, a].
    x = 0.5 * a[..., None] * (_GL_NODES + 1.0)
    one_x2 = 1.0 + x * x
    f = np.exp(-0.5 * (h[..., None] ** 2) * one_x2) / one_x2
    return 0.25 * a / np.pi * (f @ _GL_WEIGHTS)


def owen_t(h, a):
    """Owen's T function ``T(h, a)``.

    For ``|a| <= 1`` the defining integral is evaluated by 64-point
    Gauss-Legendre quadrature; for ``|a| > 1`` the reflection
    ``T(h, a) = [Phi(h)Q(ah) + Phi(ah)Q(h)] / 2 - T(ah, 1/a)`` (``h >= 0``,
    ``Q = 1 - Phi``) maps the problem back into that region.
    """
    h, a = np.broadcast_arrays(np.abs(np.asarray(h, float)), np.asarray(a, float))
    sign = np.sign(a)
    a = np.abs(a)
    out = np.zeros(h.shape)
    small = a <= 1.0
    if np.any(small):
        out[small] = _owen_t_quad(h[small], a[small])
    big = ~small & np.isfinite(a)
    if np.any(big):
        hb, ab = h[big], a[big]
        ah = ab * hb
        ph, qh = sp.ndtr(hb), sp.ndtr(-hb)
        pah, qah = sp.ndtr(ah), sp.ndtr(-ah)
        out[big] = 0.5 * (ph * qah + pah * qh) - _owen_t_quad(ah, 1.0 / ab)
    inf = np.isinf(a)
    if np.any(inf):
        out[inf] = 0.5 * sp.ndtr(-h[inf])
    out = sign * out
    return out[()] if out.ndim == 0 else out


def _mills_series(x):
    z = 1.0 / (x * x)
    # S - 1 where Phi(x) ~ phi(x) S / |x| as x -> -inf
    return -z + 3 * z**2 - 15 * z**3 + 105 * z**4 - 945 * z**5


def zeta1(x):
    """First derivative of ``log(2 Phi(x))``, i.e. ``phi(x) / Phi(x)``.

    Below ``x = -25`` the ratio is taken from the asymptotic Mills-ratio
    expansion to avoid underflow in both numerator and denominator.
    """
    x = np.asarray(x, dtype=float)
    lo = x < -25.0
    xs = np.where(lo, -30.0, x)
    direct = np.exp(-0.5 * xs * xs - 0.5 * np.log(2 * np.pi) - sp.log_ndtr(xs))
    xl = np.where(lo, x, -30.0)
    asym = -xl / (1.0 + _mills_series(xl))
    out = np.where(lo, asym, direct)
    return out[()] if out.ndim == 0 else out


def zeta2(x):
    """Second derivative of ``log(2 Phi(x))``."""
    x = np.asarray(x, dtype=float)
    z1 = np.asarray(zeta1(x))
    lo = x < -25.0
    xl = np.where(lo, x, -30.0)
    s1 = _mills_series(xl)
    asym = -z1 * xl * s1 / (1.0 + s1)
    out = np.where(lo, asym, -z1 * (x + z1))
    return out[()] if out.ndim == 0 else out
