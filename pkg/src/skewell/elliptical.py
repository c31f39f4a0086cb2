"""Elliptical densities built from a radial density generator.

A ``d``-dimensional elliptical density has the form
``c_d |Omega|^{-1/2} g((y - xi)' Omega^{-1} (y - xi))``. Three generators are
supported: the normal, Pearson type VII (which contains the multivariate t at
``M = (d + nu) / 2``) and Pearson type II (bounded support).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special as sp

from ._linalg import chol_upper, quad_form
from .exceptions import DomainError
from .special import incomplete_beta, student_t_cdf

__all__ = [
    "DensityGenerator",
    "EllipticalParams",
    "ConditionalGenerator",
    "elliptical_logpdf",
    "elliptical_pdf",
    "radius_sample",
    "elliptical_sample",
    "sphere_sample",
    "pvii_cdf1",
    "pii_cdf1",
    "conditional_generator",
]

FAMILIES = ("normal", "pvii", "pii")


@dataclass(frozen=True)
class DensityGenerator:
    """Radial generator of an elliptical family in dimension ``dim``.

    Parameters
    ----------
    family : {"normal", "pvii", "pii"}
    dim : int
    M, nu : float, optional
        ``pvii`` needs ``M > dim / 2`` and ``nu > 0``; ``pii`` needs ``nu > -1``.
    """

    family: str
    dim: int
    M: float | None = None
    nu: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown generator family {self.family!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if self.family == "pvii":
            if self.nu is None or not self.nu > 0:
                raise DomainError("PVII generator needs nu > 0")
            if self.M is None or not self.M > self.dim / 2:
                raise DomainError(f"PVII generator needs M > d/2 = {self.dim / 2}")
        elif self.family == "pii":
            if self.nu is None or not self.nu > -1:
                raise DomainError("PII generator needs nu > -1")

    @classmethod
    def normal(cls, dim):
        return cls("normal", dim)

    @classmethod
    def pvii(cls, dim, M, nu):
        return cls("pvii", dim, float(M), float(nu))

    @classmethod
    def student(cls, dim, nu):
        """The multivariate t generator, PVII with ``M = (dim + nu) / 2``."""
        return cls("pvii", dim, 0.5 * (dim + nu), float(nu))

    @classmethod
    def pii(cls, dim, nu):
        return cls("pii", dim, None, float(nu))

    def with_dim(self, dim):
        return DensityGenerator(self.family, dim, self.M, self.nu)

    @cached_property
    def log_normalizer(self):
        """``log c_d``."""
        d = self.dim
        if self.family == "normal":
            return -0.5 * d * np.log(2 * np.pi)
        if self.family == "pvii":
            return (
                sp.gammaln(self.M)
                - 0.5 * d * np.log(np.pi * self.nu)
                - sp.gammaln(self.M - 0.5 * d)
            )
        return (
            sp.gammaln(0.5 * d + self.nu + 1)
            - 0.5 * d * np.log(np.pi)
            - sp.gammaln(self.nu + 1)
        )

    def log_generator(self, q):
        """``log g(q)`` for a quadratic form ``q >= 0``; ``-inf`` off support."""
        q = np.asarray(q, dtype=float)
        if self.family == "normal":
            return -0.5 * q
        if self.family == "pvii":
            return -self.M * np.log1p(q / self.nu)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = sp.xlog1py(self.nu, -np.minimum(q, 1.0))
        return np.where(q > 1.0, -np.inf, out)

    @property
    def support_radius(self):
        return 1.0 if self.family == "pii" else np.inf


@dataclass(frozen=True, eq=False)
class EllipticalParams:
    """Location ``xi``, dispersion ``omega_mat`` and generator of an elliptical law."""

    xi: np.ndarray
    omega_mat: np.ndarray
    gen: DensityGenerator

    def __post_init__(self):
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        om = np.atleast_2d(np.asarray(self.omega_mat, dtype=float))
        if om.shape != (xi.size, xi.size):
            raise DomainError(f"omega_mat shape {om.shape} does not match xi of length {xi.size}")
        if self.gen.dim != xi.size:
            raise DomainError("generator dimension does not match xi")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "omega_mat", om)
        # fail early on a non-SPD dispersion
        self.chol

    @property
    def dim(self):
        return self.xi.size

    @cached_property
    def chol(self):
        """Upper-triangular ``L`` with ``L' L = Omega``."""
        return chol_upper(self.omega_mat)

    @cached_property
    def log_det(self):
        return 2.0 * np.sum(np.log(np.diag(self.chol)))


def elliptical_logpdf(y, p):
    """Log-density of ``Ell_d(xi, Omega, g)`` at the rows of ``y``."""
    y = np.asarray(y, dtype=float)
    q = quad_form(y - p.xi, p.chol)
    return p.gen.log_normalizer - 0.5 * p.log_det + p.gen.log_generator(q)


def elliptical_pdf(y, p):
    return np.exp(elliptical_logpdf(y, p))


def radius_sample(gen, rng, size=None):
    """Draw the generating variate ``R`` of ``Y = xi + R L' S``.

    ``R^2`` is chi-square(d) for the normal generator,
    ``nu B / (1 - B)`` with ``B ~ Beta(d/2, M - d/2)`` for PVII, and
    ``Beta(d/2, nu + 1)`` for PII.
    """
    d = gen.dim
    if gen.family == "normal":
        r2 = rng.chisquare(d, size)
    elif gen.family == "pvii":
        b = rng.beta(0.5 * d, gen.M - 0.5 * d, size)
        r2 = gen.nu * b / (1.0 - b)
    else:
        r2 = rng.beta(0.5 * d, gen.nu + 1.0, size)
    return np.sqrt(r2)


def sphere_sample(dim, rng, size=None):
    """Uniform draws on the unit sphere of ``R^dim`` (trailing axis)."""
    shape = (dim,) if size is None else (*np.atleast_1d(size), dim)
    g = rng.standard_normal(shape)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def elliptical_sample(p, rng, size=None):
    r = radius_sample(p.gen, rng, size)
    s = sphere_sample(p.dim, rng, size)
    return p.xi + np.asarray(r)[..., None] * (s @ p.chol)


def pvii_cdf1(x, M, nu):
    """Distribution function of the scalar ``PVII_1(0, 1, M, nu)``."""
    if not M > 0.5 or not nu > 0:
        raise DomainError("pvii_cdf1 needs M > 1/2 and nu > 0")
    k = 2.0 * M - 1.0
    return student_t_cdf(np.asarray(x, dtype=float) * np.sqrt(k / nu), k)


def pii_cdf1(x, nu):
    """Distribution function of the scalar ``PII_1(0, 1, nu)`` on ``(-1, 1)``."""
    if not nu > -1:
        raise DomainError("pii_cdf1 needs nu > -1")
    u = 0.5 * (np.clip(np.asarray(x, dtype=float), -1.0, 1.0) + 1.0)
    return incomplete_beta(nu + 1.0, nu + 1.0, u)


@dataclass(frozen=True)
class ConditionalGenerator:
    """Scalar generator of ``(U_0 | U = u)`` standardized by its regression.

    ``scale`` multiplies the standardized variate; it is ``sqrt(1 - q)`` for
    the PII family and 1 otherwise.
    """

    gen: DensityGenerator
    scale: float = 1.0

    def params(self):
        return EllipticalParams(np.zeros(1), np.array([[self.scale**2]]), self.gen)

    def cdf(self, x):
        x = np.asarray(x, dtype=float) / self.scale
        if self.gen.family == "normal":
            return sp.ndtr(x)
        if self.gen.family == "pvii":
            return pvii_cdf1(x, self.gen.M, self.gen.nu)
        return pii_cdf1(x, self.gen.nu)


def conditional_generator(gen, q):
    """Generator of one component given the others, whose quadratic form is ``q``.

    ``gen`` is the joint generator. For PVII(M, nu) the scalar conditional
    is PVII_1(M, nu + q); for PII(nu) it is PII_1(nu) with support
    scaled by ``sqrt(1 - q)``; the normal generator does not depend on ``q``.
    """
    if q < 0:
        raise DomainError("q must be nonnegative")
    if gen.family == "normal":
        return ConditionalGenerator(DensityGenerator.normal(1))
    if gen.family == "pvii":
        return ConditionalGenerator(DensityGenerator.pvii(1, gen.M, gen.nu + q))
    if q > 1:
        raise DomainError("PII conditioning needs q <= 1")
    return ConditionalGenerator(DensityGenerator.pii(1, gen.nu), float(np.sqrt(1.0 - q)))
