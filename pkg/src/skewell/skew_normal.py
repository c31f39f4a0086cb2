"""Multivariate skew-normal and extended skew-normal distributions.

``SN_d(xi, Omega, alpha)`` has density
``2 phi_d(y - xi; Omega) Phi(alpha' omega^{-1} (y - xi))`` where ``omega`` is
the diagonal matrix of marginal scales. The extended variant adds a
truncation parameter ``tau``; ``tau = 0`` recovers the plain law.
"""

from dataclasses import dataclass
from typing import NamedTuple
from functools import cached_property

import numpy as np
from scipy import special as sp

from ._linalg import as_matrix, as_vector, chol_upper, quad_form
from .exceptions import DomainError
from .special import owen_t, zeta1, zeta2

__all__ = [
    "SnParams",
    "delta_from_alpha",
    "alpha_from_delta",
    "sn_logpdf",
    "sn_pdf",
    "sn_cgf",
    "sn_mean",
    "transformation_psi",
    "sn_sample_conditioning",
    "sn_sample_transformation",
    "sn_sample_max",
    "sn_affine",
    "sn_scalar_cdf",
    "sn_cdf",
    "sn_moments",
    "CdfResult",
    "Moments",
]


def delta_from_alpha(alpha, corr):
    """``delta = corr alpha / sqrt(1 + alpha' corr alpha)``."""
    alpha = as_vector(alpha, "alpha")
    corr = as_matrix(corr, "corr", alpha.size)
    ca = corr @ alpha
    return ca / np.sqrt(1.0 + alpha @ ca)


def alpha_from_delta(delta, corr):
    """Inverse of :func:`delta_from_alpha`; needs ``delta' corr^{-1} delta < 1``."""
    delta = as_vector(delta, "delta")
    corr = as_matrix(corr, "corr", delta.size)
    cinv_d = np.linalg.solve(corr, delta)
    s = float(delta @ cinv_d)
    if not s < 1.0:
        raise DomainError(f"delta' corr^-1 delta must be < 1, got {s:.6g}")
    return cinv_d / np.sqrt(1.0 - s)


@dataclass(frozen=True, eq=False)
class SnParams:
    """Parameters of ``SN_d(xi, Omega, alpha)``, extended when ``tau != 0``."""

    xi: np.ndarray
    omega_mat: np.ndarray
    alpha: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        xi = as_vector(self.xi, "xi")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "omega_mat", as_matrix(self.omega_mat, "omega_mat", xi.size))
        object.__setattr__(self, "alpha", as_vector(self.alpha, "alpha", xi.size))
        object.__setattr__(self, "tau", float(self.tau))
        self.chol

    @classmethod
    def scalar(cls, xi, omega, alpha, tau=0.0):
        """Scalar law with location ``xi`` and scale ``omega`` (not variance)."""
        return cls([xi], [[omega * omega]], [alpha], tau)

    @property
    def dim(self):
        return self.xi.size

    @cached_property
    def chol(self):
        return chol_upper(self.omega_mat)

    @cached_property
    def omega(self):
        """Marginal scales, the diagonal of ``omega``."""
        return np.sqrt(np.diag(self.omega_mat))

    @cached_property
    def corr(self):
        return self.omega_mat / np.outer(self.omega, self.omega)

    @cached_property
    def alpha_quad(self):
        return float(self.alpha @ self.corr @ self.alpha)

    @cached_property
    def delta(self):
        return self.corr @ self.alpha / np.sqrt(1.0 + self.alpha_quad)

    @cached_property
    def alpha0(self):
        # tau (1 - delta' corr^-1 delta)^{-1/2}, written via alpha for stability
        return self.tau * np.sqrt(1.0 + self.alpha_quad)

    @cached_property
    def log_det(self):
        return 2.0 * np.sum(np.log(np.diag(self.chol)))

    def shape_argument(self, y):
        """``alpha' omega^{-1} (y - xi)`` for the rows of ``y``."""
        return ((np.asarray(y, dtype=float) - self.xi) / self.omega) @ self.alpha


def sn_logpdf(y, p):
    y = np.asarray(y, dtype=float)
    q = quad_form(y - p.xi, p.chol)
    log_phi = -0.5 * (p.dim * np.log(2 * np.pi) + p.log_det + q)
    arg = p.shape_argument(y)
    if p.tau == 0.0:
        return np.log(2.0) + log_phi + sp.log_ndtr(arg)
    return -sp.log_ndtr(p.tau) + log_phi + sp.log_ndtr(p.alpha0 + arg)


def sn_pdf(y, p):
    return np.exp(sn_logpdf(y, p))


def sn_cgf(t, p):
    """Cumulant generating function of the plain skew normal."""
    if p.tau != 0.0:
        raise DomainError("sn_cgf is defined here for tau = 0 only")
    t = np.asarray(t, dtype=float)
    quad = 0.5 * np.einsum("...i,ij,...j->...", t, p.omega_mat, t)
    return t @ p.xi + quad + np.log(2.0) + sp.log_ndtr(t @ (p.omega * p.delta))


def sn_mean(p):
    scale = np.sqrt(2.0 / np.pi) if p.tau == 0.0 else zeta1(p.tau)
    return p.xi + p.omega * p.delta * scale


def _truncated_u0(tau, rng, size):
    # U_0 ~ N(0, 1) conditioned on U_0 + tau > 0, by inversion
    u = rng.random(size)
    return -sp.ndtri(u * sp.ndtr(tau))


def _omega_star(p):
    d = p.dim
    star = np.empty((d + 1, d + 1))
    star[0, 0] = 1.0
    star[0, 1:] = star[1:, 0] = p.delta
    star[1:, 1:] = p.corr
    try:
        return chol_upper(star)
    except DomainError as err:
        raise DomainError("Omega* = [[1, delta'], [delta, corr]] is not positive definite") from err


def sn_sample_conditioning(p, rng, size=None):
    """Draw by conditioning a ``(d+1)``-variate normal on ``U_0 > -tau``.

    For ``tau = 0`` this is the sign flip ``Z = U`` if ``U_0 > 0`` else ``-U``.
    """
    n = 1 if size is None else int(size)
    if p.tau == 0.0:
        chol = _omega_star(p)
        u_star = rng.standard_normal((n, p.dim + 1)) @ chol
        sign = np.where(u_star[:, :1] > 0, 1.0, -1.0)
        z = sign * u_star[:, 1:]
    else:
        _omega_star(p)
        u0 = _truncated_u0(p.tau, rng, n)
        resid = chol_upper(p.corr - np.outer(p.delta, p.delta))
        z = u0[:, None] * p.delta + rng.standard_normal((n, p.dim)) @ resid
    out = p.xi + p.omega * z
    return out[0] if size is None else out


def transformation_psi(delta, corr):
    """Correlation ``Psi`` such that the transformation method reproduces ``corr``."""
    delta = as_vector(delta, "delta")
    s = np.sqrt(1.0 - delta * delta)
    psi = (corr - np.outer(delta, delta)) / np.outer(s, s)
    np.fill_diagonal(psi, 1.0)
    return psi


def sn_sample_transformation(p, rng, size=None):
    """Draw ``Z_j = delta_j |U_0| + sqrt(1 - delta_j^2) U_j`` with ``U ~ N(0, Psi)``."""
    n = 1 if size is None else int(size)
    psi = transformation_psi(p.delta, p.corr)
    try:
        chol = chol_upper(psi)
    except DomainError as err:
        raise DomainError("Psi implied by (corr, delta) is not positive definite") from err
    if p.tau == 0.0:
        u0 = np.abs(rng.standard_normal(n))
    else:
        u0 = _truncated_u0(p.tau, rng, n)
    u = rng.standard_normal((n, p.dim)) @ chol
    z = u0[:, None] * p.delta + np.sqrt(1.0 - p.delta**2) * u
    out = p.xi + p.omega * z
    return out[0] if size is None else out


def sn_sample_max(p, rng, size=None):
    """Scalar draws as ``max(U_0, U_1)`` of a standard bivariate normal.

    The correlation is ``rho = (1 - alpha^2) / (1 + alpha^2)``; a negative
    ``alpha`` uses the minimum instead.
    """
    if p.dim != 1 or p.tau != 0.0:
        raise DomainError("the max representation is scalar with tau = 0")
    a = float(p.alpha[0])
    rho = (1.0 - a * a) / (1.0 + a * a)
    n = 1 if size is None else int(size)
    u0 = rng.standard_normal(n)
    u1 = rho * u0 + np.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
    m = np.maximum(u0, u1) if a >= 0 else np.minimum(u0, u1)
    out = p.xi + p.omega * m[:, None]
    return out[0] if size is None else out


def sn_affine(a, A, p):
    """Parameters of ``a + A Z`` for ``Z ~ SN_d`` and a full-row-rank ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m = A.shape[0]
    a = as_vector(a, "a", m)
    if A.shape[1] != p.dim:
        raise DomainError(f"A must have {p.dim} columns")
    if m > p.dim or np.linalg.matrix_rank(A) < m:
        raise DomainError("A must have full row rank m <= d")
    omega_new = A @ p.omega_mat @ A.T
    omega_new = 0.5 * (omega_new + omega_new.T)
    w_new = np.sqrt(np.diag(omega_new))
    corr_new = omega_new / np.outer(w_new, w_new)
    delta_new = A @ (p.omega * p.delta) / w_new
    alpha_new = alpha_from_delta(delta_new, corr_new)
    return SnParams(a + A @ p.xi, omega_new, alpha_new, p.tau)


def sn_scalar_cdf(y, p):
    """Distribution function of a scalar plain skew normal via Owen's T."""
    if p.dim != 1 or p.tau != 0.0:
        raise DomainError("sn_scalar_cdf needs d = 1 and tau = 0")
    z = (np.asarray(y, dtype=float) - p.xi[0]) / p.omega[0]
    return sp.ndtr(z) - 2.0 * owen_t(z, p.alpha[0])


class CdfResult(NamedTuple):
    value: float
    error: float
    method: str


def orthant_mc(c, delta, corr, tau, rng, n_pairs, chunk, nu=None):
    """Monte Carlo ``P(Z <= c)`` for a standardized (extended) SN or skew-t.

    Uses antithetic pairs ``(U_0, U), (-U_0, -U)`` of the joint normal; with
    ``nu`` given the bound is scaled by ``sqrt(V)``. Returns the estimate and
    its standard error.
    """
    d = delta.size
    star = np.empty((d + 1, d + 1))
    star[0, 0] = 1.0
    star[0, 1:] = star[1:, 0] = delta
    star[1:, 1:] = corr
    chol = chol_upper(star)
    norm = sp.ndtr(tau)
    total = total_sq = 0.0
    done = 0
    while done < n_pairs:
        m = min(chunk, n_pairs - done)
        u = rng.standard_normal((m, d + 1)) @ chol
        bound = c if nu is None else c * np.sqrt(rng.chisquare(nu, m) / nu)[:, None]
        h_pos = (u[:, 0] > -tau) & np.all(u[:, 1:] <= bound, axis=1)
        h_neg = (-u[:, 0] > -tau) & np.all(-u[:, 1:] <= bound, axis=1)
        h = 0.5 * (h_pos.astype(float) + h_neg) / norm
        total += h.sum()
        total_sq += (h * h).sum()
        done += m
    mean = total / n_pairs
    var = max(total_sq / n_pairs - mean * mean, 0.0)
    return float(mean), float(np.sqrt(var / n_pairs))


def sn_cdf(y, p, rng=None, n_pairs=1_000_000, chunk=100_000):
    """``P(Y <= y)``: Owen's T for the scalar plain law, Monte Carlo otherwise."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (p.dim,):
        raise DomainError(f"y must have length {p.dim}")
    if p.dim == 1 and p.tau == 0.0:
        return CdfResult(float(sn_scalar_cdf(y[0], p)), 0.0, "owen-t")
    if rng is None:
        raise DomainError("Monte Carlo CDF needs an explicit rng")
    c = (y - p.xi) / p.omega
    value, err = orthant_mc(c, p.delta, p.corr, p.tau, rng, n_pairs, chunk)
    return CdfResult(value, err, "monte-carlo")


@dataclass(frozen=True)
class Moments:
    mean: np.ndarray
    variance: np.ndarray | None = None
    gamma1: float | None = None
    gamma2: float | None = None


def sn_moments(p):
    """Mean and variance; skewness and excess kurtosis for the scalar plain law."""
    wd = p.omega * p.delta
    if p.tau == 0.0:
        b = np.sqrt(2.0 / np.pi)
        mean = p.xi + b * wd
        var = p.omega_mat - b * b * np.outer(wd, wd)
        if p.dim != 1:
            return Moments(mean, var)
        mu = b * float(p.delta[0])
        s2 = 1.0 - mu * mu
        g1 = 0.5 * (4.0 - np.pi) * mu**3 / s2**1.5
        g2 = 2.0 * (np.pi - 3.0) * mu**4 / s2**2
        return Moments(mean, var, float(g1), float(g2))
    mean = p.xi + zeta1(p.tau) * wd
    var = p.omega_mat + zeta2(p.tau) * np.outer(wd, wd)
    return Moments(mean, var)
