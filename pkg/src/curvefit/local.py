"""Deterministic local least-squares fitting.

Three methods minimise the residual sum of squares from a starting point:
Levenberg-Marquardt (default), Nelder-Mead simplex and gradient descent with
Armijo backtracking. Every method only accepts steps that lower the loss, so
the returned loss never exceeds the loss at ``init``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from . import models
from .errors import DomainError, NonFinite

METHODS = ("levenberg_marquardt", "nelder_mead", "gradient_descent")


@dataclass(frozen=True)
class LocalConfig:
    max_iter: int = 100
    loss_tol: float = 1e-10
    step_tol: float = 1e-10
    method: str = "levenberg_marquardt"

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not (self.loss_tol > 0 and self.step_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")


@dataclass(frozen=True, eq=False)
class FitResult:
    theta_hat: np.ndarray
    loss: float
    iterations: int
    converged: bool
    method: str
    info: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, FitResult):
            return NotImplemented
        return (
            self.theta_hat.tobytes() == other.theta_hat.tobytes()
            and (self.loss, self.iterations, self.converged, self.method)
            == (other.loss, other.iterations, other.converged, other.method)
        )

    __hash__ = None

    def to_dict(self):
        return {
            "theta": [float(v) for v in self.theta_hat],
            "loss": float(self.loss),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "method": self.method,
        }


def _xy(d):
    if not d.is_complete:
        raise ValueError("dataset has missing entries; impute or drop them first")
    return np.asarray(d.x, dtype=float), np.asarray(d.y, dtype=float)


def rss(spec, theta, d):
    """Residual sum of squares of ``spec`` at ``theta`` over the complete dataset ``d``."""
    x, y = _xy(d)
    r = y - models.evaluate(spec, theta, x)
    return float(r @ r)


def residuals(spec, theta, d):
    x, y = _xy(d)
    return y - models.evaluate(spec, theta, x)


def gradient(spec, theta, d):
    """Gradient of the RSS, -2 J^T r."""
    x, _ = _xy(d)
    return -2.0 * models.jacobian(spec, theta, x).T @ residuals(spec, theta, d)


class _Objective:
    """RSS that maps domain errors, box violations and overflow to +inf."""

    def __init__(self, spec, x, y, bounds=None):
        self.spec = spec
        self.x = x
        self.y = y
        if spec.domain is not None:
            ok = spec.domain(x)
            if not np.all(ok):
                raise DomainError(int(np.flatnonzero(~ok)[0]))
        self.lo = self.hi = None
        if bounds is not None:
            b = np.asarray(bounds, dtype=float)
            self.lo, self.hi = b[:, 0], b[:, 1]

    def inside(self, theta):
        if self.lo is None:
            return True
        return bool(np.all(theta >= self.lo) and np.all(theta <= self.hi))

    def residuals(self, theta):
        with np.errstate(all="ignore"):
            return self.y - np.asarray(self.spec.evaluator(theta, self.x), dtype=float) * np.ones_like(self.x)

    def __call__(self, theta):
        if not self.inside(theta):
            return np.inf
        r = self.residuals(theta)
        with np.errstate(all="ignore"):
            v = float(r @ r)
        return v if np.isfinite(v) else np.inf

    def jacobian(self, theta):
        return models.jacobian(self.spec, theta, self.x)


def _small_step(step, theta, tol):
    return float(np.linalg.norm(step)) <= tol * (float(np.linalg.norm(theta)) + tol)


def _rel_change(old, new):
    return (old - new) / old if old > 0 else 0.0


def _damped_solve(J, r, lam, scale):
    """Least-squares solution of [J; sqrt(lam)*diag(scale)] delta = [r; 0] via QR."""
    p = J.shape[1]
    A = np.vstack([J, np.sqrt(lam) * np.diag(scale)])
    b = np.concatenate([r, np.zeros(p)])
    Q, R = np.linalg.qr(A)
    return solve_triangular(R, Q.T @ b)


def _levenberg_marquardt(obj, theta, loss, cfg):
    lam = 1e-3
    it = 0
    converged = loss == 0.0
    while not converged and it < cfg.max_iter:
        it += 1
        r = obj.residuals(theta)
        J = obj.jacobian(theta)
        if not np.all(np.isfinite(J)):
            break
        col2 = np.einsum("ij,ij->j", J, J)
        scale = np.sqrt(np.maximum(col2, 1e-12 * max(col2.max(), 1.0)))
        accepted = False
        while lam < 1e16:
            step = _damped_solve(J, r, lam, scale)
            trial = theta + step
            trial_loss = obj(trial) if np.all(np.isfinite(step)) else np.inf
            if trial_loss < loss:
                accepted = True
                lam = max(lam / 10.0, 1e-12)
                break
            lam *= 10.0
            if _small_step(step, theta, cfg.step_tol):
                break
        if not accepted:
            # no descent at any damping: stationary to working precision
            converged = _small_step(step, theta, cfg.step_tol)
            break
        change = _rel_change(loss, trial_loss)
        theta, loss = trial, trial_loss
        if loss == 0.0 or change < cfg.loss_tol or _small_step(step, theta, cfg.step_tol):
            converged = True
    return theta, loss, it, converged


def _nelder_mead(obj, theta, loss, cfg):
    n = theta.size
    simplex = [theta.copy()]
    for j in range(n):
        v = theta.copy()
        v[j] = v[j] + (0.05 * abs(v[j]) if v[j] != 0 else 0.05)
        simplex.append(v)
    simplex = np.array(simplex)
    f = np.array([loss] + [obj(v) for v in simplex[1:]])
    it = 0
    converged = False
    while it < cfg.max_iter:
        order = np.argsort(f, kind="stable")
        simplex, f = simplex[order], f[order]
        spread = f[-1] - f[0]
        diam = np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1))
        if f[0] == 0.0 or (np.isfinite(spread) and spread <= cfg.loss_tol * f[0]) \
                or diam <= cfg.step_tol * (np.linalg.norm(simplex[0]) + cfg.step_tol):
            converged = True
            break
        it += 1
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = obj(xr)
        if fr < f[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = obj(xe)
            simplex[-1], f[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < f[-2]:
            simplex[-1], f[-1] = xr, fr
        else:
            if fr < f[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = obj(xc)
            if fc < min(fr, f[-1]):
                simplex[-1], f[-1] = xc, fc
            else:
                simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
                f[1:] = [obj(v) for v in simplex[1:]]
    best = int(np.argmin(f))
    return simplex[best], float(f[best]), it, converged


def _gradient_descent(obj, theta, loss, cfg, c=1e-4):
    t = 1.0
    it = 0
    converged = loss == 0.0
    while not converged and it < cfg.max_iter:
        it += 1
        g = -2.0 * obj.jacobian(theta).T @ obj.residuals(theta)
        gg = float(g @ g)
        if not np.isfinite(gg) or gg == 0.0:
            converged = gg == 0.0
            break
        t *= 2.0
        while True:
            step = -t * g
            trial_loss = obj(theta + step)
            if trial_loss <= loss - c * t * gg and trial_loss < loss:
                break
            t *= 0.5
            if _small_step(step, theta, cfg.step_tol):
                step = None
                break
        if step is None:
            converged = True
            break
        change = _rel_change(loss, trial_loss)
        theta, loss = theta + step, trial_loss
        if loss == 0.0 or change < cfg.loss_tol or _small_step(step, theta, cfg.step_tol):
            converged = True
    return theta, loss, it, converged


_DISPATCH = {
    "levenberg_marquardt": _levenberg_marquardt,
    "nelder_mead": _nelder_mead,
    "gradient_descent": _gradient_descent,
}


def fit(spec, d, init, cfg: Optional[LocalConfig] = None, bounds=None):
    """Minimise the residual sum of squares of ``spec`` over ``d`` from ``init``.

    Parameters
    ----------
    spec : ModelSpec
    d : Dataset
        Must be complete.
    init : array_like
        Starting parameters, length ``spec.param_count``.
    cfg : LocalConfig, optional
    bounds : array_like of shape (p, 2), optional
        Trial points outside this box are rejected. Used to keep a polish
        step inside the global search box; ``init`` must lie inside it.

    Returns
    -------
    FitResult
        ``loss`` is recomputed with :func:`rss` at ``theta_hat``.
    """
    cfg = cfg or LocalConfig()
    x, y = _xy(d)
    theta = np.asarray(init, dtype=float).ravel().copy()
    if theta.size != spec.param_count:
        raise ValueError(f"{spec.name} takes {spec.param_count} parameters, got {theta.size}")
    if not np.all(np.isfinite(theta)):
        raise NonFinite("initial parameters must be finite")
    obj = _Objective(spec, x, y, bounds)
    loss0 = obj(theta)
    if not np.isfinite(loss0):
        raise NonFinite(f"loss at the initial point is not finite for {spec.name}")
    theta, loss, it, converged = _DISPATCH[cfg.method](obj, theta, loss0, cfg)
    final = rss(spec, theta, d)
    return FitResult(np.array(theta, dtype=float), final, it, bool(converged), cfg.method)
