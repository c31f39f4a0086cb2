"""Skew-elliptical distributions obtained by conditioning.

If ``U* = (U_0, U) ~ Ell_{d+1}(0, Omega*, g)`` with
``Omega* = [[1, delta'], [delta, corr]]``, then ``Z = (U | U_0 > 0)`` has
density ``2 f_U(z) F(w(z))``. For the Pearson type VII and type II
generators the skewing factor is a fixed distribution function:

* PVII_{d+1}(M, nu): ``f_U`` is PVII_d(M - 1/2, nu), ``F`` is the
  PVII_1(M, 1) CDF and ``w(z) = alpha' z / sqrt(nu + Q_z)``;
* PII_{d+1}(nu): ``f_U`` is PII_d(nu + 1/2), ``F`` is the PII_1(nu) CDF
  and ``w(z) = alpha' z / sqrt(1 - Q_z)``;
* normal: the skew normal with ``w(z) = alpha' z``.

Here ``Q_z = z' corr^{-1} z``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special as sp

from ._linalg import as_matrix, as_vector, chol_upper, quad_form
from .elliptical import (
    DensityGenerator,
    EllipticalParams,
    elliptical_logpdf,
    elliptical_sample,
    pii_cdf1,
    pvii_cdf1,
)
from .exceptions import DomainError
from .skew_normal import CdfResult, delta_from_alpha

__all__ = [
    "SkewEllipticalParams",
    "se_logpdf",
    "spvii_logpdf",
    "spii_logpdf",
    "skewing_argument",
    "se_sample_conditioning",
    "se_xtilde",
    "se_transform_params",
    "se_sample_transformation",
    "se_sample_max2",
    "sphere_coords",
    "angular_logpdf",
    "se_cdf",
]


def _joint_generator(gen, d):
    if gen.dim == d + 1:
        return gen
    if gen.dim == d:
        return gen.with_dim(d + 1)
    raise DomainError(f"generator dimension {gen.dim} fits neither d={d} nor d+1")


@dataclass(frozen=True, eq=False)
class SkewEllipticalParams:
    """Location, correlation, shape and joint generator of a skew-elliptical law.

    ``gen`` describes ``U*`` in dimension ``d + 1``; a generator given in
    dimension ``d`` is promoted keeping its ``(M, nu)``, which for PVII
    requires ``M > (d + 1) / 2``.
    """

    xi: np.ndarray
    corr: np.ndarray
    alpha: np.ndarray
    gen: DensityGenerator

    def __post_init__(self):
        xi = as_vector(self.xi, "xi")
        d = xi.size
        corr = as_matrix(self.corr, "corr", d)
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12, rtol=0):
            raise DomainError("corr must have unit diagonal")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "corr", corr)
        object.__setattr__(self, "alpha", as_vector(self.alpha, "alpha", d))
        object.__setattr__(self, "gen", _joint_generator(self.gen, d))
        self.chol

    @property
    def dim(self):
        return self.xi.size

    @property
    def family(self):
        return self.gen.family

    @cached_property
    def chol(self):
        return chol_upper(self.corr)

    @cached_property
    def delta(self):
        return delta_from_alpha(self.alpha, self.corr)

    @cached_property
    def omega_star(self):
        d = self.dim
        star = np.empty((d + 1, d + 1))
        star[0, 0] = 1.0
        star[0, 1:] = star[1:, 0] = self.delta
        star[1:, 1:] = self.corr
        return star

    @cached_property
    def marginal_gen(self):
        """Generator of ``f_U`` in dimension ``d``."""
        g, d = self.gen, self.dim
        if g.family == "pvii":
            return DensityGenerator.pvii(d, g.M - 0.5, g.nu)
        if g.family == "pii":
            return DensityGenerator.pii(d, g.nu + 0.5)
        return DensityGenerator.normal(d)

    @cached_property
    def marginal(self):
        return EllipticalParams(self.xi, self.corr, self.marginal_gen)

    def skew_cdf(self, x):
        """The fixed scalar distribution function ``F`` of the skewing factor."""
        g = self.gen
        if g.family == "pvii":
            return pvii_cdf1(x, g.M, 1.0)
        if g.family == "pii":
            return pii_cdf1(x, g.nu)
        return sp.ndtr(x)


def skewing_argument(z, p):
    """``w(z)`` for the rows of ``z``; ``nan`` outside the PII support."""
    diff = np.asarray(z, dtype=float) - p.xi
    lin = diff @ p.alpha
    if p.family == "normal":
        return lin
    q = quad_form(diff, p.chol)
    if p.family == "pvii":
        return lin / np.sqrt(p.gen.nu + q)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(q < 1.0, lin / np.sqrt(1.0 - q), np.nan)


def se_logpdf(z, p):
    """``log 2 + log f_U(z) + log F(w(z))``."""
    z = np.asarray(z, dtype=float)
    base = elliptical_logpdf(z, p.marginal)
    w = skewing_argument(z, p)
    if p.family == "pii":
        inside = np.isfinite(base) & np.isfinite(w)
        w = np.where(inside, w, 0.0)
        with np.errstate(divide="ignore"):
            out = np.log(2.0) + base + np.log(p.skew_cdf(w))
        return np.where(inside, out, -np.inf)
    if p.family == "normal":
        return np.log(2.0) + base + sp.log_ndtr(w)
    with np.errstate(divide="ignore"):
        return np.log(2.0) + base + np.log(p.skew_cdf(w))


def spvii_logpdf(z, p):
    if p.family != "pvii":
        raise DomainError("spvii_logpdf needs a PVII generator")
    return se_logpdf(z, p)


def spii_logpdf(z, p):
    if p.family != "pii":
        raise DomainError("spii_logpdf needs a PII generator")
    return se_logpdf(z, p)


def _star_params(p):
    try:
        return EllipticalParams(np.zeros(p.dim + 1), p.omega_star, p.gen)
    except DomainError as err:
        raise DomainError("Omega* = [[1, delta'], [delta, corr]] is not positive definite") from err


def se_sample_conditioning(p, rng, size=None):
    """Draw ``U*`` and return ``xi + U`` if ``U_0 > 0`` else ``xi - U``."""
    n = 1 if size is None else int(size)
    u_star = elliptical_sample(_star_params(p), rng, n)
    z = np.where(u_star[:, :1] > 0, 1.0, -1.0) * u_star[:, 1:]
    out = p.xi + z
    return out[0] if size is None else out


def se_xtilde(p, rng, size):
    """Draw ``(X~, U)`` where ``X~`` is the standardized residual of ``U_0`` on ``U``.

    ``X~`` follows the skewing distribution ``F`` independently of ``U``,
    and ``U`` is kept when ``X~ < w(U)``.
    """
    if p.family == "normal":
        raise DomainError("se_xtilde is defined for the PVII and PII generators")
    u_star = elliptical_sample(_star_params(p), rng, int(size))
    u0, u = u_star[:, 0], u_star[:, 1:]
    cinv_d = np.linalg.solve(p.corr, p.delta)
    s = float(p.delta @ cinv_d)
    q = quad_form(u, p.chol)
    resid = (u0 - u @ cinv_d) / np.sqrt(1.0 - s)
    scale = p.gen.nu + q if p.family == "pvii" else 1.0 - q
    return -resid / np.sqrt(scale), u


def se_transform_params(delta, psi):
    """Correlation ``Omega`` and shape ``alpha`` produced by the transformation method.

    With ``lambda = delta / sqrt(1 - delta^2)`` and
    ``Delta = diag(1 / sqrt(1 + lambda^2))``,
    ``Omega = Delta (Psi + lambda lambda') Delta`` and
    ``alpha = Delta^{-1} Psi^{-1} lambda / sqrt(1 + lambda' Psi^{-1} lambda)``.
    """
    delta = as_vector(delta, "delta")
    if np.any(np.abs(delta) >= 1.0):
        raise DomainError("all |delta_j| must be < 1")
    psi = as_matrix(psi, "psi", delta.size)
    chol_upper(psi)
    lam = delta / np.sqrt(1.0 - delta * delta)
    dg = 1.0 / np.sqrt(1.0 + lam * lam)
    omega = dg[:, None] * (psi + np.outer(lam, lam)) * dg[None, :]
    np.fill_diagonal(omega, 1.0)
    pinv_lam = np.linalg.solve(psi, lam)
    alpha = pinv_lam / dg / np.sqrt(1.0 + lam @ pinv_lam)
    return omega, alpha


def se_sample_transformation(delta, psi, gen, rng, size=None):
    """Draw ``Z_j = delta_j |U_0| + sqrt(1 - delta_j^2) U_j``.

    ``(U_0, U) ~ Ell_{d+1}(0, diag(1, Psi), gen)``; ``Z`` then follows the
    skew-elliptical law with parameters from :func:`se_transform_params`.
    """
    delta = as_vector(delta, "delta")
    d = delta.size
    psi = as_matrix(psi, "psi", d)
    if np.any(np.abs(delta) >= 1.0):
        raise DomainError("all |delta_j| must be < 1")
    star = np.zeros((d + 1, d + 1))
    star[0, 0] = 1.0
    star[1:, 1:] = psi
    n = 1 if size is None else int(size)
    u_star = elliptical_sample(EllipticalParams(np.zeros(d + 1), star, _joint_generator(gen, d)), rng, n)
    z = delta * np.abs(u_star[:, :1]) + np.sqrt(1.0 - delta * delta) * u_star[:, 1:]
    return z[0] if size is None else z


def se_sample_max2(rho, gen, rng, size=None):
    """Draw ``max(U_0, U_1)`` for ``(U_0, U_1) ~ Ell_2(0, [[1, rho], [rho, 1]], gen)``.

    Equivalent to the transformation method with ``delta = sqrt((1 - rho) / 2)``
    and ``Psi = 1``.
    """
    if not -1.0 < rho < 1.0:
        raise DomainError("rho must lie in (-1, 1)")
    star = np.array([[1.0, rho], [rho, 1.0]])
    n = 1 if size is None else int(size)
    u = elliptical_sample(EllipticalParams(np.zeros(2), star, _joint_generator(gen, 1)), rng, n)
    out = u.max(axis=1)[:, None]
    return out[0] if size is None else out


def sphere_coords(theta):
    """Unit vectors from spherical angles ``theta`` of shape ``(..., d - 1)``."""
    theta = np.asarray(theta, dtype=float)
    k = theta.shape[-1]
    s = np.ones(theta.shape[:-1] + (k + 1,))
    sin_prod = np.ones(theta.shape[:-1])
    for j in range(k):
        s[..., j] = sin_prod * np.cos(theta[..., j])
        sin_prod = sin_prod * np.sin(theta[..., j])
    s[..., k] = sin_prod
    return s


def _radius_quantiles(gen, n):
    u = (np.arange(n) + 0.5) / n
    d = gen.dim
    if gen.family == "normal":
        r2 = sp.chdtri(d, 1.0 - u)
    elif gen.family == "pvii":
        b = sp.betaincinv(0.5 * d, gen.M - 0.5 * d, u)
        r2 = gen.nu * b / (1.0 - b)
    else:
        r2 = sp.betaincinv(0.5 * d, gen.nu + 1.0, u)
    return np.sqrt(r2)


def _angular_w(p, s, r):
    lin = r * (s @ (p.chol @ p.alpha))
    if p.family == "normal":
        return lin
    if p.family == "pvii":
        return lin / np.sqrt(p.gen.nu + r * r)
    return lin / np.sqrt(1.0 - r * r)


def angular_logpdf(theta, p, r=None, n_r=4096):
    """Log-density of the direction ``S'`` in ``Z = xi + R L' S'`` (``corr = L' L``).

    Parameters
    ----------
    theta : array_like, shape (..., d - 1)
        Angles with ``theta_k`` in ``[0, pi)`` for ``k < d - 1`` and the last
        one in ``[0, 2 pi)``.
    p : SkewEllipticalParams
    r : float, optional
        Condition on ``R = r``. When omitted the skewing probability is
        averaged over ``n_r`` midpoint quantiles of the radius law; the
        skew-normal case uses the exact ``T_1(sqrt(d) alpha*' s; d)`` form.
    """
    d = p.dim
    if d < 2:
        raise DomainError("angular density needs d >= 2")
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != d - 1:
        raise DomainError(f"theta must have trailing length {d - 1}")
    lead, last = theta[..., :-1], theta[..., -1]
    if np.any((lead < 0) | (lead >= np.pi)) or np.any((last < 0) | (last >= 2 * np.pi)):
        raise DomainError("angles out of range")
    powers = d - 2 - np.arange(d - 2)
    with np.errstate(divide="ignore"):
        log_jac = np.sum(powers * np.log(np.sin(lead)), axis=-1) if d > 2 else 0.0
    log_c = sp.gammaln(0.5 * d) - 0.5 * d * np.log(np.pi)
    s = sphere_coords(theta)
    if r is not None:
        if not r > 0:
            raise DomainError("r must be positive")
        if p.family == "pii" and r >= 1.0:
            raise DomainError("PII radius must be < 1")
        prob = p.skew_cdf(_angular_w(p, s, float(r)))
    elif p.family == "normal":
        prob = sp.stdtr(d, np.sqrt(d) * (s @ (p.chol @ p.alpha)))
    else:
        radii = _radius_quantiles(p.marginal_gen, int(n_r))
        lin = s @ (p.chol @ p.alpha)
        if p.family == "pvii":
            w = lin[..., None] * (radii / np.sqrt(p.gen.nu + radii**2))
        else:
            w = lin[..., None] * (radii / np.sqrt(1.0 - radii**2))
        prob = np.mean(p.skew_cdf(w), axis=-1)
    with np.errstate(divide="ignore"):
        return log_c + log_jac + np.log(prob)


def se_cdf(y, p, rng, n=1_000_000, chunk=100_000):
    """Monte Carlo ``P(Z <= y)`` from conditioning draws, with its standard error."""
    y = as_vector(y, "y", p.dim)
    hits = done = 0
    while done < n:
        m = min(chunk, n - done)
        z = se_sample_conditioning(p, rng, m)
        hits += int(np.count_nonzero(np.all(z <= y, axis=1)))
        done += m
    value = hits / n
    return CdfResult(value, float(np.sqrt(value * (1.0 - value) / n)), "monte-carlo")
