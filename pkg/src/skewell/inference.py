"""Maximum likelihood for skew-t linear regression.

Observations follow ``y_i ~ St_d(beta' x_i, Omega, alpha, nu)``. The
likelihood is maximized over the unconstrained coordinates

    theta = (beta, A, rho, eta, log nu),
    Omega^{-1} = A' diag(exp(-2 rho)) A,   eta = omega^{-1} alpha,

with ``A`` unit upper triangular, using analytic first derivatives. The only
derivative evaluated numerically is that of ``log T_1(t; k)`` with respect
to the degrees of freedom ``k`` at a fixed argument ``t``.
"""

from dataclasses import dataclass, field
import json
import warnings
from typing import Sequence

import numpy as np
from scipy import linalg
from scipy import special as sp
from scipy.stats import chi2

from ._optim import bfgs_box, projected_gradient
from .exceptions import DomainError, NumericError
from .skew_normal import alpha_from_delta
from .skew_t import StParams, st_logpdf
from .special import student_t_logcdf, student_t_logpdf

__all__ = [
    "Dataset",
    "ThetaParam",
    "FitConfig",
    "FitResult",
    "ProfileResult",
    "CONVERGED",
    "MAX_ITER",
    "BOUNDARY_NU",
    "REPORT_SCHEMA",
    "nu_threshold",
    "theta_size",
    "initial_theta",
    "loglik",
    "loglik_terms",
    "loglik_grad",
    "fit_mle",
    "observed_info",
    "profile_loglik",
]

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
BOUNDARY_NU = "BoundaryNu"
REPORT_SCHEMA = "skewell.fit/1"
PROFILE_LEVELS = (0.50, 0.75, 0.90, 0.95, 0.99)
LOG2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Responses ``y`` (n x d) and design matrix ``x`` (n x p)."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if y.ndim != 2 or x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise DomainError(f"y {y.shape} and x {x.shape} must be 2-D with equal rows")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise DomainError("data contain non-finite entries")
        n, p = x.shape
        if n <= p:
            raise DomainError(f"need more observations than covariates (n={n}, p={p})")
        rank = 0
        for j in range(p):
            r = np.linalg.matrix_rank(x[:, : j + 1])
            if r == rank:
                raise DomainError(f"design matrix column {j} is collinear with earlier columns")
            rank = r
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @classmethod
    def from_arrays(cls, y, x=None, intercept=True):
        """Build a dataset, prepending a column of ones when ``intercept``."""
        y = np.asarray(y, dtype=float)
        n = y.shape[0]
        cols = [np.ones((n, 1))] if intercept else []
        if x is not None:
            x = np.asarray(x, dtype=float)
            cols.append(x[:, None] if x.ndim == 1 else x)
        if not cols:
            raise DomainError("empty design: pass x or intercept=True")
        return cls(y, np.hstack(cols))

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def d(self):
        return self.y.shape[1]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def intercept_col(self):
        """Index of an all-ones column, or ``None``."""
        hits = np.flatnonzero(np.all(self.x == 1.0, axis=0))
        return int(hits[0]) if hits.size else None


def nu_threshold(data):
    """The degrees-of-freedom threshold ``nu_0 = d / (n - 1)``."""
    if data.n < 2:
        raise DomainError("nu threshold needs n >= 2")
    return data.d / (data.n - 1.0)


def _n_upper(d):
    return d * (d - 1) // 2


@dataclass(frozen=True, eq=False)
class ThetaParam:
    """Optimizer coordinates. ``a_upper`` is the strict upper triangle of ``A``, row-major."""

    beta: np.ndarray
    a_upper: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    log_nu: float

    def __post_init__(self):
        beta = np.atleast_2d(np.asarray(self.beta, dtype=float))
        d = beta.shape[1]
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "a_upper", np.asarray(self.a_upper, dtype=float).reshape(_n_upper(d)))
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float).reshape(d))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=float).reshape(d))
        object.__setattr__(self, "log_nu", float(self.log_nu))

    @property
    def p(self):
        return self.beta.shape[0]

    @property
    def d(self):
        return self.beta.shape[1]

    @property
    def size(self):
        return theta_size(self.p, self.d)

    def pack(self):
        return np.concatenate([self.beta.ravel(), self.a_upper, self.rho, self.eta, [self.log_nu]])

    @classmethod
    def unpack(cls, vec, p, d):
        vec = np.asarray(vec, dtype=float)
        if vec.size != theta_size(p, d):
            raise DomainError(f"theta vector must have length {theta_size(p, d)}")
        i = p * d
        k = _n_upper(d)
        return cls(vec[:i].reshape(p, d), vec[i : i + k], vec[i + k : i + k + d],
                   vec[i + k + d : i + k + 2 * d], vec[-1])

    @property
    def A(self):
        d = self.d
        a = np.eye(d)
        a[np.triu_indices(d, 1)] = self.a_upper
        return a

    @property
    def D(self):
        return np.exp(-2.0 * self.rho)

    @property
    def omega_inv(self):
        a = self.A
        return a.T @ (self.D[:, None] * a)

    @property
    def omega_mat(self):
        a_inv = linalg.solve_triangular(self.A, np.eye(self.d), lower=False)
        om = a_inv @ (a_inv.T / self.D[:, None])
        return 0.5 * (om + om.T)

    @property
    def omega(self):
        return np.sqrt(np.diag(self.omega_mat))

    @property
    def alpha(self):
        return self.omega * self.eta

    @property
    def nu(self):
        return float(np.exp(self.log_nu))

    def st_params(self, xi=None):
        """Skew-t parameters with location ``xi`` (zero by default)."""
        xi = np.zeros(self.d) if xi is None else xi
        return StParams(xi, self.omega_mat, self.alpha, self.nu)

    @classmethod
    def from_natural(cls, beta, omega_mat, alpha, nu):
        beta = np.atleast_2d(np.asarray(beta, dtype=float))
        omega_mat = np.atleast_2d(np.asarray(omega_mat, dtype=float))
        prec = np.linalg.inv(omega_mat)
        r = linalg.cholesky(0.5 * (prec + prec.T), lower=False)
        diag = np.diag(r)
        a = r / diag[:, None]
        d = omega_mat.shape[0]
        omega = np.sqrt(np.diag(omega_mat))
        return cls(beta, a[np.triu_indices(d, 1)], -np.log(diag),
                   np.asarray(alpha, dtype=float) / omega, np.log(nu))


def theta_size(p, d):
    return p * d + _n_upper(d) + 2 * d + 1


def _as_theta(theta, data):
    if isinstance(theta, ThetaParam):
        return theta
    return ThetaParam.unpack(theta, data.p, data.d)


def loglik_terms(theta, data):
    """Per-observation log-likelihood contributions ``l_i``."""
    th = _as_theta(theta, data)
    return _core(th, data, need_grad=False)[0]


def _core(th, data, need_grad):
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return _core_unguarded(th, data, need_grad)


def _core_unguarded(th, data, need_grad):
    d, nu = data.d, th.nu
    k = nu + d
    u = data.y - data.x @ th.beta
    a = th.A
    Dd = th.D
    au = u @ a.T
    q = au * au @ Dd
    lin = u @ th.eta
    qn = q + nu
    tdot_l = np.sqrt(k / qn)
    t = lin * tdot_l
    log_g = (sp.gammaln(0.5 * k) - sp.gammaln(0.5 * nu) - 0.5 * d * np.log(np.pi * nu)
             - 0.5 * k * np.log1p(q / nu))
    log_t1 = student_t_logcdf(t, k)
    terms = LOG2 - np.sum(th.rho) + log_g + log_t1
    bad = ~np.isfinite(terms)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise NumericError(f"log-likelihood term is not finite at observation {idx}", index=idx)
    if not need_grad:
        return terms, None
    g_q = -0.5 * k / qn
    t1_ratio = np.exp(student_t_logpdf(t, k) - log_t1)
    tdot_q = -0.5 * lin * np.sqrt(k) / qn**1.5
    w = g_q + t1_ratio * tdot_q
    v = t1_ratio * tdot_l
    prec = a.T @ (Dd[:, None] * a)

    g_beta = -2.0 * data.x.T @ (w[:, None] * u) @ prec - np.outer(data.x.T @ v, th.eta)
    m = 2.0 * (Dd[:, None] * a) @ (u.T @ (w[:, None] * u))
    g_a = m[np.triu_indices(d, 1)]
    g_dstar = (w @ (au * au)) + 0.5 * data.n / Dd
    g_rho = g_dstar * (-2.0 * Dd)
    g_eta = u.T @ v

    dlogg = 0.5 * (sp.psi(0.5 * k) - sp.psi(0.5 * nu) - d / nu
                   + k * q / (nu * nu * (1.0 + q / nu)) - np.log1p(q / nu))
    dt_dnu = t * (q - d) / (2.0 * k * qn)
    h = 1e-4 * max(1.0, k)
    dlogt_dk = (student_t_logcdf(t, k + h) - student_t_logcdf(t, k - h)) / (2.0 * h)
    g_nu = np.sum(dlogg + t1_ratio * dt_dnu + dlogt_dk)
    grad = np.concatenate([g_beta.ravel(), g_a, g_rho, g_eta, [g_nu * nu]])
    return terms, grad


def loglik(theta, data):
    """Total log-likelihood ``sum_i l_i``."""
    return float(np.sum(loglik_terms(theta, data)))


def loglik_grad(theta, data):
    """Analytic gradient of :func:`loglik` in packed theta order."""
    return _core(_as_theta(theta, data), data, need_grad=True)[1]


def _value_grad(vec, data):
    terms, grad = _core(ThetaParam.unpack(vec, data.p, data.d), data, need_grad=True)
    return float(np.sum(terms)), grad


@dataclass(frozen=True)
class FitConfig:
    """Options for :func:`fit_mle`.

    ``nu_floor`` is ``"auto"`` (``nu_0 + 0.01``), ``None`` (no floor, for
    exploring the likelihood near ``nu = 0``) or an explicit positive value.
    """

    max_iter: int = 500
    grad_tol: float = 1e-6
    nu_floor: object = "auto"
    nu_init: float = 10.0
    nu_max: float = 1e4
    theta0: object = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if not self.grad_tol > 0:
            raise DomainError("grad_tol must be positive")
        if not self.nu_init > 0 or not self.nu_max > 0:
            raise DomainError("nu_init and nu_max must be positive")
        if not (self.nu_floor is None or self.nu_floor == "auto"
                or (isinstance(self.nu_floor, (int, float)) and self.nu_floor > 0)):
            raise DomainError("nu_floor must be 'auto', None or a positive number")

    def floor_value(self, data):
        if self.nu_floor is None:
            return None
        if self.nu_floor == "auto":
            return nu_threshold(data) + 0.01
        return float(self.nu_floor)


@dataclass(eq=False)
class FitResult:
    """Outcome of :func:`fit_mle`.

    ``se_alpha`` is ``omega_hat * se(eta)``, the chain rule through
    ``alpha = omega eta`` at the fitted ``omega``; ``se_alpha_delta`` also
    propagates the uncertainty of ``omega``. ``se_nu = nu * se(log nu)``.
    ``params`` carries ``(Omega, alpha, nu)`` with zero location; the
    regression coefficients are in ``beta``.
    """

    theta_hat: ThetaParam
    params: StParams
    beta: np.ndarray
    loglik: float
    grad: np.ndarray
    grad_norm: float
    observed_info: np.ndarray
    std_errors: np.ndarray
    se_alpha: np.ndarray
    se_alpha_delta: np.ndarray
    se_nu: float
    se_beta: np.ndarray
    convergence: str
    iterations: int
    nu_floor: float | None
    nu_max: float
    info_pd: bool = True
    message: str = ""
    n: int = 0

    @property
    def converged(self):
        return self.convergence in (CONVERGED, BOUNDARY_NU)

    @property
    def alpha(self):
        return self.params.alpha

    @property
    def nu(self):
        return self.params.nu

    @property
    def omega_mat(self):
        return self.params.omega_mat

    def to_dict(self):
        p = self.params
        return {
            "schema": REPORT_SCHEMA,
            "n": self.n,
            "d": int(p.dim),
            "p": int(self.beta.shape[0]),
            "loglik": self.loglik,
            "convergence": self.convergence,
            "message": self.message,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "nu_floor": self.nu_floor,
            "nu_max": self.nu_max,
            "theta": self.theta_hat.pack().tolist(),
            "natural": {
                "beta": self.beta.tolist(),
                "omega": p.omega_mat.tolist(),
                "alpha": p.alpha.tolist(),
                "nu": p.nu,
            },
            "std_errors": {
                "theta": self.std_errors.tolist(),
                "beta": self.se_beta.tolist(),
                "alpha": self.se_alpha.tolist(),
                "alpha_delta_method": self.se_alpha_delta.tolist(),
                "nu": self.se_nu,
            },
            "information_positive_definite": self.info_pd,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _sn_delta_from_skewness(g1):
    # invert the skew-normal skewness index for |delta|
    c = np.cbrt(2.0 * np.abs(g1) / (4.0 - np.pi))
    b = np.sqrt(2.0 / np.pi)
    return np.sign(g1 + (g1 == 0)) * c / (b * np.sqrt(1.0 + c * c))


def initial_theta(data, nu_init=10.0):
    """Deterministic starting point from least squares and residual moments."""
    beta, *_ = np.linalg.lstsq(data.x, data.y, rcond=None)
    res = data.y - data.x @ beta
    cov = res.T @ res / data.n
    omega_mat = cov * (nu_init - 2.0) / nu_init if nu_init > 2 else cov
    omega = np.sqrt(np.diag(omega_mat))
    corr = omega_mat / np.outer(omega, omega)
    centred = res - res.mean(axis=0)
    sd = np.sqrt(np.mean(centred**2, axis=0))
    g1 = np.mean(centred**3, axis=0) / sd**3
    delta = _sn_delta_from_skewness(g1)
    delta = np.sign(delta) * np.clip(np.abs(delta), 0.1, 0.99)
    for _ in range(200):
        if delta @ np.linalg.solve(corr, delta) < 0.95:
            break
        delta *= 0.9
    alpha = alpha_from_delta(delta, corr)
    ic = data.intercept_col
    if ic is not None:
        beta = beta.copy()
        mu = delta * np.sqrt(nu_init / np.pi) * np.exp(
            sp.gammaln(0.5 * (nu_init - 1.0)) - sp.gammaln(0.5 * nu_init))
        beta[ic] -= omega * mu
    return ThetaParam.from_natural(beta, omega_mat, alpha, nu_init)


def _nu_bounds(data, config, size):
    lo = np.full(size, -np.inf)
    hi = np.full(size, np.inf)
    floor = config.floor_value(data)
    if floor is not None:
        lo[-1] = np.log(floor)
    hi[-1] = np.log(config.nu_max)
    return lo, hi, floor


def _standardizer(data):
    """Column scalings ``y = m + s y'`` and ``x = c x'`` used during optimization."""
    ic = data.intercept_col
    sy = data.y.std(axis=0)
    sy = np.where(sy > 0, sy, 1.0)
    my = data.y.mean(axis=0) if ic is not None else np.zeros(data.d)
    cx = data.x.std(axis=0)
    cx = np.where(cx > 0, cx, 1.0)
    if ic is not None:
        cx[ic] = 1.0
    return my, sy, cx


def _to_standard(th, my, sy, cx, ic):
    beta = th.beta.copy()
    if ic is not None:
        beta[ic] -= my
    beta = (cx[:, None] * beta) / sy[None, :]
    om = th.omega_mat / np.outer(sy, sy)
    return ThetaParam.from_natural(beta, om, th.alpha, th.nu)


def _from_standard(th, my, sy, cx, ic):
    beta = th.beta * sy[None, :] / cx[:, None]
    if ic is not None:
        beta[ic] += my
    om = th.omega_mat * np.outer(sy, sy)
    return ThetaParam.from_natural(beta, om, th.alpha, th.nu)


def _numerical_hessian(grad_fn, vec, rel_step=1e-5):
    n = vec.size
    hess = np.empty((n, n))
    for j in range(n):
        h = rel_step * max(1.0, abs(vec[j]))
        e = np.zeros(n)
        e[j] = h
        hess[:, j] = (grad_fn(vec + e) - grad_fn(vec - e)) / (2.0 * h)
    return 0.5 * (hess + hess.T)


def _newton_polish(data, vec, lo, hi, tol, steps=8):
    """A few damped Newton steps at the original scale."""
    f, g = _value_grad(vec, data)
    for _ in range(steps):
        pg, active = projected_gradient(vec, -g, lo, hi)
        if np.max(np.abs(pg)) <= tol * max(1.0, abs(f)):
            break
        free = ~active
        hess = _numerical_hessian(lambda v: loglik_grad(v, data), vec)
        hf = -hess[np.ix_(free, free)]
        try:
            cho = linalg.cho_factor(hf)
        except linalg.LinAlgError:
            break
        step = np.zeros_like(vec)
        step[free] = linalg.cho_solve(cho, g[free])
        t = 1.0
        moved = False
        for _ in range(30):
            trial = np.clip(vec + t * step, lo, hi)
            try:
                f_new, g_new = _value_grad(trial, data)
            except NumericError:
                f_new = -np.inf
            if f_new >= f - 1e-12 * max(1.0, abs(f)):
                vec, f, g = trial, f_new, g_new
                moved = True
                break
            t *= 0.5
        if not moved:
            break
    return vec, f, g


def _safe_neg(data):
    def fun_grad(vec):
        try:
            f, g = _value_grad(vec, data)
        except NumericError:
            return np.inf, np.zeros_like(vec)
        return -f, -g
    return fun_grad


def fit_mle(data, config=None):
    """Maximize the skew-t regression likelihood.

    The search runs on internally standardized responses and covariates,
    then is mapped back and refined by damped Newton steps at the original
    scale. ``log nu`` is kept in ``[log floor, log nu_max]``; ``convergence``
    is ``BoundaryNu`` when the optimum sits on either bound and ``MaxIter``
    when the gradient tolerance was not met.
    """
    config = FitConfig() if config is None else config
    size = theta_size(data.p, data.d)
    lo, hi, floor = _nu_bounds(data, config, size)
    ic = data.intercept_col
    my, sy, cx = _standardizer(data)
    std_data = Dataset((data.y - my) / sy, data.x / cx)

    if config.theta0 is not None:
        th0 = _as_theta(config.theta0, data)
        th0 = _to_standard(th0, my, sy, cx, ic)
    else:
        nu0 = float(np.clip(config.nu_init, np.exp(lo[-1]) * 1.01, config.nu_max * 0.99))
        th0 = initial_theta(std_data, nu0)
    x0 = np.clip(th0.pack(), lo, hi)
    try:
        f0 = loglik(x0, std_data)
    except NumericError as err:
        raise NumericError(f"log-likelihood not finite at the initial point: {err}", index=err.index) from err
    if not np.isfinite(f0):
        raise NumericError("log-likelihood not finite at the initial point")

    try:
        hess0 = _numerical_hessian(lambda v: loglik_grad(v, std_data), x0)
        h0 = np.linalg.inv(-hess0)
        np.linalg.cholesky(h0)
    except (np.linalg.LinAlgError, NumericError):
        h0 = None
    opt = bfgs_box(_safe_neg(std_data), x0, lo, hi, h0=h0, max_iter=config.max_iter,
                   tol=0.1 * config.grad_tol)

    th_std = ThetaParam.unpack(opt.x, data.p, data.d)
    vec = _from_standard(th_std, my, sy, cx, ic).pack()
    vec = np.clip(vec, lo, hi)
    vec, f, g = _newton_polish(data, vec, lo, hi, config.grad_tol)

    pg, active = projected_gradient(vec, -g, lo, hi)
    grad_norm = float(np.max(np.abs(pg)))
    ok = grad_norm <= config.grad_tol * max(1.0, abs(f))
    if not ok and opt.iterations < config.max_iter:
        # one more quasi-Newton pass at the original scale
        opt2 = bfgs_box(_safe_neg(data), vec, lo, hi, max_iter=config.max_iter, tol=config.grad_tol)
        if -opt2.fun >= f:
            vec, f, g = opt2.x, -opt2.fun, -opt2.grad
        pg, active = projected_gradient(vec, -g, lo, hi)
        grad_norm = float(np.max(np.abs(pg)))
        ok = grad_norm <= config.grad_tol * max(1.0, abs(f))
    on_bound = bool(vec[-1] <= lo[-1] or vec[-1] >= hi[-1])
    if not ok:
        status = MAX_ITER
    elif on_bound:
        status = BOUNDARY_NU
    else:
        status = CONVERGED

    th = ThetaParam.unpack(vec, data.p, data.d)
    info, cov, info_pd = observed_info(th, data)
    se_theta = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    i_eta = data.p * data.d + _n_upper(data.d) + data.d
    # alpha = omega * eta with omega held at its estimate
    se_alpha = th.omega * se_theta[i_eta : i_eta + data.d]
    jac = _natural_jacobian(vec, data)
    se_alpha_delta = np.sqrt(np.clip(np.einsum("ij,jk,ik->i", jac, cov, jac), 0.0, None))
    nu = th.nu
    se_nu = float(nu * se_theta[-1])
    pd_ = data.p * data.d
    return FitResult(
        theta_hat=th,
        params=th.st_params(),
        beta=th.beta.copy(),
        loglik=float(f),
        grad=g,
        grad_norm=grad_norm,
        observed_info=info,
        std_errors=se_theta,
        se_alpha=se_alpha,
        se_alpha_delta=se_alpha_delta,
        se_nu=se_nu,
        se_beta=se_theta[:pd_].reshape(data.p, data.d),
        convergence=status,
        iterations=int(opt.iterations),
        nu_floor=floor,
        nu_max=config.nu_max,
        info_pd=info_pd,
        message="gradient tolerance met" if ok else f"gradient tolerance not met ({opt.message})",
        n=data.n,
    )


def _natural_jacobian(vec, data, rel_step=1e-6):
    """Jacobian of ``alpha(theta)`` by central differences."""
    p, d = data.p, data.d
    jac = np.empty((d, vec.size))
    for j in range(vec.size):
        h = rel_step * max(1.0, abs(vec[j]))
        e = np.zeros(vec.size)
        e[j] = h
        hi_ = ThetaParam.unpack(vec + e, p, d).alpha
        lo_ = ThetaParam.unpack(vec - e, p, d).alpha
        jac[:, j] = (hi_ - lo_) / (2.0 * h)
    return jac


def observed_info(theta, data, rel_step=1e-5):
    """Observed information by central differences of the analytic gradient.

    Returns ``(info, cov, positive_definite)``. When the symmetrized matrix
    is not positive definite a warning is issued and ``cov`` is the
    Moore-Penrose pseudo-inverse.
    """
    vec = _as_theta(theta, data).pack()
    info = -_numerical_hessian(lambda v: loglik_grad(v, data), vec, rel_step)
    try:
        cho = linalg.cho_factor(info)
        cov = linalg.cho_solve(cho, np.eye(vec.size))
        return info, 0.5 * (cov + cov.T), True
    except linalg.LinAlgError:
        warnings.warn("observed information is not positive definite; using pseudo-inverse",
                      RuntimeWarning, stacklevel=2)
        return info, np.linalg.pinv(info), False


@dataclass(eq=False)
class ProfileResult:
    names: tuple
    axes: list
    deviance: np.ndarray
    loglik: np.ndarray
    loglik_hat: float
    thresholds: dict
    mle: dict
    missing: np.ndarray = field(default=None)

    def region(self, level):
        """Boolean array of grid points with deviance below the ``level`` threshold."""
        return self.deviance <= self.thresholds[level]


_PROFILE_NAMES = ("alpha", "log_nu", "log_omega")


def _profile_value(th, name):
    if name == "alpha":
        return float(th.alpha[0])
    if name == "log_nu":
        return th.log_nu
    return float(th.rho[0])


def profile_loglik(data, which: Sequence[str], grid: Sequence, fit=None, config=None,
                   include_mle=True):
    """Twice the profile log-likelihood drop over a grid of fixed values.

    Parameters
    ----------
    which : sequence of {"alpha", "log_nu", "log_omega"}
        One or two parameters to hold fixed. ``alpha`` and ``log_omega``
        need ``d = 1``.
    grid : sequence of 1-D arrays, one per name in ``which``.
    fit : FitResult, optional
        The unrestricted fit; computed when omitted.
    include_mle : bool
        Insert the unrestricted estimate into each grid axis.

    Returns
    -------
    ProfileResult
        ``deviance = 2 (l_hat - l_profile)`` on the grid, with chi-square
        thresholds at levels 0.50, 0.75, 0.90, 0.95 and 0.99 for as many
        degrees of freedom as parameters fixed. Grid points whose inner
        maximization fails are ``nan`` and flagged in ``missing``.
    """
    which = tuple(which)
    if not 1 <= len(which) <= 2 or len(set(which)) != len(which):
        raise DomainError("profile one or two distinct parameters")
    for name in which:
        if name not in _PROFILE_NAMES:
            raise DomainError(f"unknown profile parameter {name!r}")
        if name in ("alpha", "log_omega") and data.d != 1:
            raise DomainError(f"profiling {name} needs d = 1")
    if len(grid) != len(which):
        raise DomainError("give one grid axis per profiled parameter")
    config = FitConfig() if config is None else config
    fit = fit_mle(data, config) if fit is None else fit
    th_hat = fit.theta_hat
    mle = {name: _profile_value(th_hat, name) for name in which}
    axes = []
    for name, ax in zip(which, grid):
        ax = np.asarray(ax, dtype=float).ravel()
        if include_mle:
            ax = np.unique(np.append(ax, mle[name]))
        axes.append(ax)

    size = theta_size(data.p, data.d)
    lo, hi, _ = _nu_bounds(data, config, size)
    i_rho = data.p * data.d + _n_upper(data.d)
    i_eta = i_rho + data.d
    i_nu = size - 1
    fixed_idx = []
    if "log_nu" in which:
        fixed_idx.append(i_nu)
    if "log_omega" in which:
        fixed_idx.append(i_rho)
    if "alpha" in which:
        fixed_idx.append(i_eta)
    free = np.setdiff1d(np.arange(size), fixed_idx)

    def inner(values, start):
        vals = dict(zip(which, values))
        base = start.copy()
        if "log_nu" in vals:
            base[i_nu] = vals["log_nu"]
        if "log_omega" in vals:
            base[i_rho] = vals["log_omega"]

        def expand(z):
            full = base.copy()
            full[free] = z
            if "alpha" in vals:
                full[i_eta] = vals["alpha"] * np.exp(-full[i_rho])
            return full

        def fun_grad(z):
            full = expand(z)
            try:
                f, g = _value_grad(full, data)
            except NumericError:
                return np.inf, np.zeros_like(z)
            if "alpha" in vals and "log_omega" not in vals:
                g = g.copy()
                g[i_rho] -= full[i_eta] * g[i_eta]
            return -f, -g[free]

        opt = bfgs_box(fun_grad, start[free], lo[free], hi[free], max_iter=config.max_iter,
                       tol=config.grad_tol)
        return -opt.fun, expand(opt.x), opt.converged

    shape = tuple(ax.size for ax in axes)
    ll = np.full(shape, np.nan)
    missing = np.zeros(shape, dtype=bool)
    start_vec = th_hat.pack()
    # walk the grid outward from the point nearest the MLE, warm starting each fit
    idx_hat = tuple(int(np.argmin(np.abs(ax - mle[n]))) for ax, n in zip(axes, which))
    order = sorted(np.ndindex(shape), key=lambda ix: sum(abs(a - b) for a, b in zip(ix, idx_hat)))
    starts = {}
    for ix in order:
        neighbours = [tuple(ix[:j]) + (ix[j] - s,) + tuple(ix[j + 1:])
                      for j in range(len(ix)) for s in (-1, 1)]
        warm = next((starts[nb] for nb in neighbours if nb in starts), start_vec)
        values = [ax[i] for ax, i in zip(axes, ix)]
        try:
            val, vec, ok = inner(values, warm)
        except (NumericError, FloatingPointError, np.linalg.LinAlgError):
            missing[ix] = True
            continue
        if not np.isfinite(val):
            missing[ix] = True
            continue
        ll[ix] = val
        starts[ix] = vec
    ll_hat = fit.loglik
    dev = 2.0 * (ll_hat - ll)
    # an inner fit can land slightly above the joint optimum through rounding
    dev = np.where(dev < 0, np.where(dev > -1e-4, 0.0, dev), dev)
    k = len(which)
    thresholds = {lv: float(chi2.ppf(lv, k)) for lv in PROFILE_LEVELS}
    return ProfileResult(which, axes, dev, ll, ll_hat, thresholds, mle, missing)


def st_loglik_natural(data, beta, params):
    """Sum of skew-t log-densities at natural parameters, for cross-checks."""
    xi = data.x @ np.atleast_2d(beta)
    return float(np.sum(st_logpdf(data.y - xi, params)))
