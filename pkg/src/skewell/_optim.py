"""Box-constrained BFGS used by the likelihood fits.

Minimizes ``f`` given its gradient. Bounds are handled by projection: a
coordinate sitting on a bound whose gradient pushes outwards is frozen for
the step, and trial points are clipped back into the box. Every accepted
step satisfies the Armijo decrease condition, so ``f`` never increases.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["OptimResult", "bfgs_box", "projected_gradient"]


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    iterations: int
    converged: bool
    active: np.ndarray
    message: str


def projected_gradient(x, g, lo, hi):
    """Gradient with components that point out of the box set to zero."""
    pg = g.copy()
    at_lo = (x <= lo) & (g > 0)
    at_hi = (x >= hi) & (g < 0)
    pg[at_lo | at_hi] = 0.0
    return pg, at_lo | at_hi


def bfgs_box(fun_grad, x0, lo=None, hi=None, h0=None, max_iter=500, tol=1e-6,
             scale_tol=True, c1=1e-4, max_backtrack=60):
    """Minimize with BFGS inside the box ``[lo, hi]``.

    Parameters
    ----------
    fun_grad : callable
        ``x -> (f, grad)``. Returning a non-finite ``f`` rejects the point.
    h0 : ndarray, optional
        Initial inverse-Hessian approximation (identity by default).
    tol : float
        Stop when the projected gradient's max-norm is below
        ``tol * max(1, |f|)`` (or ``tol`` when ``scale_tol`` is false).
    """
    x = np.asarray(x0, dtype=float).copy()
    n = x.size
    lo = np.full(n, -np.inf) if lo is None else np.asarray(lo, dtype=float)
    hi = np.full(n, np.inf) if hi is None else np.asarray(hi, dtype=float)
    x = np.clip(x, lo, hi)
    H = np.eye(n) if h0 is None else np.array(h0, dtype=float)
    f, g = fun_grad(x)
    if not np.isfinite(f):
        raise FloatingPointError("objective is not finite at the starting point")
    restarted = False
    it = 0
    message = "maximum iterations reached"
    converged = False
    while it < max_iter:
        pg, active = projected_gradient(x, g, lo, hi)
        thresh = tol * (max(1.0, abs(f)) if scale_tol else 1.0)
        if np.max(np.abs(pg)) <= thresh:
            converged = True
            message = "gradient tolerance met"
            break
        free = ~active
        d = np.zeros(n)
        Hf = H[np.ix_(free, free)]
        d[free] = -Hf @ g[free]
        slope = float(g @ d)
        if not slope < 0:
            # lost descent: fall back to steepest descent
            H = np.eye(n)
            d = -pg
            slope = float(g @ d)
        step = 1.0
        accepted = False
        for _ in range(max_backtrack):
            x_new = np.clip(x + step * d, lo, hi)
            s = x_new - x
            if not np.any(s):
                break
            f_new, g_new = fun_grad(x_new)
            if np.isfinite(f_new) and f_new <= f + c1 * float(g @ s):
                accepted = True
                break
            step *= 0.5
        it += 1
        if not accepted:
            if restarted:
                message = "line search failed"
                break
            H = np.eye(n) * min(1.0, 1.0 / max(np.max(np.abs(g)), 1e-12))
            restarted = True
            continue
        restarted = False
        yv = g_new - g
        sy = float(s @ yv)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            if it == 1 and h0 is None:
                H = np.eye(n) * (sy / float(yv @ yv))
            rho = 1.0 / sy
            Hy = H @ yv
            H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho * rho * float(yv @ Hy) + rho) * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
    _, active = projected_gradient(x, g, lo, hi)
    return OptimResult(x, float(f), g, it, converged, active, message)
