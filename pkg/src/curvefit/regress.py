"""Linear basis-function regression, regularised fits and model selection.

Design matrices always carry an intercept column of ones in position 0. The
ridge, lasso and elastic-net fits leave that column unpenalised.
"""

import functools
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import qr, solve_triangular

from . import local, models
from .dataset import Dataset
from .errors import DomainError, InsufficientData, NonFinite, NoConvergenceWarning, ShapeMismatch
from .metrics import Metrics, adjusted_r_squared, model_analysis
from .models import ModelSpec

BASIS_KINDS = ("polynomial", "sinusoidal", "logarithmic", "exponential-link", "power-link", "custom")
MAX_DEGREE = 10
TIE_TOL = 1e-9
_LINKS = {"exponential-link": "exponential", "power-link": "power"}


@dataclass(frozen=True)
class BasisSpec:
    kind: str
    degree: int = 1
    harmonics: int = 1
    functions: Tuple[Tuple[str, Callable], ...] = ()
    includes_intercept: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "polynomial" and not 0 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"polynomial degree must lie in [0, {MAX_DEGREE}]")
        if self.kind == "sinusoidal" and not 1 <= self.harmonics <= MAX_DEGREE:
            raise ValueError(f"harmonics must lie in [1, {MAX_DEGREE}]")
        if self.kind == "custom" and not self.functions:
            raise ValueError("a custom basis needs at least one function")

    @classmethod
    def polynomial(cls, degree):
        return cls("polynomial", degree=degree)

    @classmethod
    def sinusoidal(cls, harmonics=1):
        return cls("sinusoidal", harmonics=harmonics)

    @property
    def name(self):
        if self.kind == "polynomial":
            return {1: "linear", 2: "quadratic", 3: "cubic"}.get(self.degree, f"polynomial{self.degree}")
        if self.kind == "sinusoidal":
            return "sinusoidal" if self.harmonics == 1 else f"sinusoidal{self.harmonics}"
        if self.kind == "custom":
            return "custom(" + ",".join(n for n, _ in self.functions) + ")"
        return self.kind

    @property
    def nonlinear_model(self):
        """The ModelSpec standing in for a link basis, else ``None``."""
        name = _LINKS.get(self.kind)
        return models.get_model(name) if name else None

    @property
    def n_columns(self):
        if self.kind == "polynomial":
            return self.degree + 1
        if self.kind == "sinusoidal":
            return 2 * self.harmonics + 1
        if self.kind == "logarithmic":
            return 2
        if self.kind == "custom":
            return len(self.functions) + 1
        return self.nonlinear_model.param_count


def design_matrix(basis, x):
    """Intercept column followed by the basis functions evaluated at ``x``."""
    x = np.asarray(x, dtype=float).ravel()
    if basis.kind == "polynomial":
        return np.vander(x, basis.degree + 1, increasing=True)
    if basis.kind == "sinusoidal":
        cols = [np.ones_like(x)]
        for j in range(1, basis.harmonics + 1):
            cols += [np.sin(j * x), np.cos(j * x)]
        return np.column_stack(cols)
    if basis.kind == "logarithmic":
        bad = np.flatnonzero(x <= 0)
        if bad.size:
            raise DomainError(int(bad[0]))
        return np.column_stack([np.ones_like(x), np.log(x)])
    if basis.kind == "custom":
        cols = [np.ones_like(x)] + [np.asarray(f(x), dtype=float) * np.ones_like(x) for _, f in basis.functions]
        return np.column_stack(cols)
    raise ValueError(f"{basis.kind} is fitted as a nonlinear model, not through a design matrix")


def _check(phi, y):
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if phi.ndim != 2 or phi.shape[0] != y.size:
        raise ShapeMismatch(f"design matrix {phi.shape} does not match {y.size} responses")
    if phi.shape[0] < phi.shape[1]:
        raise ShapeMismatch("need at least as many rows as columns")
    return phi, y


def ols_fit(phi, y):
    """Least-squares coefficients via column-pivoted QR.

    A rank-deficient design gets the minimum-norm solution through a complete
    orthogonal decomposition.
    """
    phi, y = _check(phi, y)
    m, n = phi.shape
    Q, R, perm = qr(phi, mode="economic", pivoting=True)
    c = Q.T @ y
    diag = np.abs(np.diag(R))
    tol = max(m, n) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    z = np.zeros(n)
    if rank == n:
        z = solve_triangular(R, c)
    elif rank > 0:
        # R[:rank] = T^T Z^T with Z orthonormal; minimum-norm z = Z T^-T c
        Z, T = np.linalg.qr(R[:rank].T)
        w = solve_triangular(T, c[:rank], trans="T")
        z = Z @ w
    theta = np.empty(n)
    theta[perm] = z
    return theta


def ridge_fit(phi, y, lam):
    """Minimise ||y - phi theta||^2 + lam * ||theta[1:]||^2 via the augmented QR system."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    phi, y = _check(phi, y)
    p = phi.shape[1]
    if lam == 0 or p == 1:
        return ols_fit(phi, y)
    penalty = np.sqrt(lam) * np.eye(p)[1:]
    return ols_fit(np.vstack([phi, penalty]), np.concatenate([y, np.zeros(p - 1)]))


def soft_threshold(z, t):
    return np.sign(z) * max(abs(z) - t, 0.0)


@dataclass(frozen=True)
class CoordinateDescentResult:
    theta: np.ndarray
    converged: bool
    sweeps: int


def _standardize(phi):
    if not np.all(phi[:, 0] == 1.0):
        raise ValueError("column 0 of the design matrix must be the intercept (all ones)")
    X = phi[:, 1:]
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    live = sd > 0
    Z = np.zeros_like(X)
    Z[:, live] = (X[:, live] - mu[live]) / sd[live]
    return Z, mu, sd, live


def lambda_max(phi, y, alpha=1.0):
    """Smallest penalty at which every slope of the elastic net is zero."""
    if not alpha > 0:
        raise ValueError("alpha must be positive; pure ridge never zeroes a slope")
    phi, y = _check(phi, y)
    Z, _, _, live = _standardize(phi)
    cols = np.flatnonzero(live)
    if cols.size == 0:
        return 0.0
    r = y - y.mean()
    # same per-column expression as the first coordinate-descent sweep, so
    # lam = lambda_max thresholds every slope to exactly zero
    top = max(abs(Z[:, j] @ r / y.size) for j in cols)
    lam = top / alpha
    while lam * alpha < top:
        lam = np.nextafter(lam, np.inf)
    return float(lam)


def elastic_net_cd(phi, y, lam, alpha=1.0, tol=1e-8, max_sweeps=10_000):
    """Cyclic coordinate descent on standardised columns.

    Minimises (1/2n)||y - phi theta||^2 + lam*(alpha*|b|_1 + (1-alpha)/2*|b|_2^2)
    where b are the slopes on the standardised scale. Coefficients are
    returned on the original column scale with the intercept recovered from
    the column means.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    phi, y = _check(phi, y)
    n = y.size
    Z, mu, sd, live = _standardize(phi)
    ybar = y.mean()
    r = y - ybar
    beta = np.zeros(Z.shape[1])
    l1 = lam * alpha
    shrink = 1.0 + lam * (1.0 - alpha)
    cols = np.flatnonzero(live)
    converged = cols.size == 0
    sweeps = 0
    while not converged and sweeps < max_sweeps:
        sweeps += 1
        biggest = 0.0
        for j in cols:
            old = beta[j]
            rho = Z[:, j] @ r / n + old
            new = soft_threshold(rho, l1) / shrink
            if new != old:
                r -= Z[:, j] * (new - old)
                beta[j] = new
                biggest = max(biggest, abs(new - old))
        converged = biggest < tol
    coef = np.zeros_like(beta)
    coef[live] = beta[live] / sd[live]
    theta = np.concatenate([[ybar - mu @ coef], coef])
    return CoordinateDescentResult(theta, converged, sweeps)


def lasso_fit(phi, y, lam, alpha=1.0):
    """Lasso (``alpha=1``) or elastic-net coefficients.

    Emits :class:`~curvefit.errors.NoConvergenceWarning` if the sweep budget
    runs out; the last iterate is still returned.
    """
    res = elastic_net_cd(phi, y, lam, alpha)
    if not res.converged:
        warnings.warn(f"coordinate descent stopped after {res.sweeps} sweeps", NoConvergenceWarning, stacklevel=2)
    return res.theta


@dataclass(frozen=True)
class Regularizer:
    kind: str = "none"
    lam: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "ridge", "lasso", "elastic_net"):
            raise ValueError(f"unknown regularizer {self.kind!r}")
        if self.lam < 0 or not 0 <= self.alpha <= 1:
            raise ValueError("need lam >= 0 and alpha in [0, 1]")


@dataclass(frozen=True)
class RegressionModel:
    basis: BasisSpec
    theta: np.ndarray
    regularizer: Regularizer
    training_metrics: Metrics

    def predict(self, x):
        return design_matrix(self.basis, x) @ self.theta


def fit_regression(basis, x, y, regularizer: Optional[Regularizer] = None):
    reg = regularizer or Regularizer()
    phi = design_matrix(basis, x)
    if reg.kind == "none":
        theta = ols_fit(phi, y)
    elif reg.kind == "ridge":
        theta = ridge_fit(phi, y, reg.lam)
    elif reg.kind == "lasso":
        theta = lasso_fit(phi, y, reg.lam)
    else:
        theta = lasso_fit(phi, y, reg.lam, reg.alpha)
    return RegressionModel(basis, theta, reg, model_analysis(y, phi @ theta))


# --- model selection ------------------------------------------------------------

_NAMED_BASES = {
    "linear": BasisSpec.polynomial(1),
    "quadratic": BasisSpec.polynomial(2),
    "cubic": BasisSpec.polynomial(3),
    "sinusoidal": BasisSpec.sinusoidal(1),
    "logarithmic": BasisSpec("logarithmic"),
}


def candidate_from_name(name):
    """Map a CLI model name to a selection candidate."""
    if name in _NAMED_BASES:
        return _NAMED_BASES[name]
    return models.get_model(name)


def _param_count(candidate):
    if isinstance(candidate, ModelSpec):
        return candidate.param_count
    return candidate.n_columns


@dataclass(frozen=True)
class SelectionEntry:
    model_name: str
    candidate: object
    params: Optional[np.ndarray]
    metrics: Optional[Metrics]
    adj_r_squared: Optional[float]
    param_count: int
    index: int
    error: Optional[str] = None

    def to_dict(self):
        m = self.metrics
        d = {
            "model_name": self.model_name,
            "params": None if self.params is None else [float(v) for v in self.params],
            "r_squared": None if m is None else m.r_squared,
            "adj_r_squared": self.adj_r_squared,
            "mse": None if m is None else m.mse,
            "rmse": None if m is None else m.rmse,
        }
        if self.error is not None:
            d["error"] = self.error
        return d


def _fit_candidate(candidate, x, y):
    if isinstance(candidate, BasisSpec) and candidate.nonlinear_model is not None:
        candidate = candidate.nonlinear_model
    if isinstance(candidate, ModelSpec):
        d = Dataset(x, y)
        res = local.fit(candidate, d, models.default_init(candidate, d))
        return res.theta_hat, models.evaluate(candidate, res.theta_hat, x)
    phi = design_matrix(candidate, x)
    theta = ols_fit(phi, y)
    return theta, phi @ theta


def _compare(a, b):
    """Order by adjusted R^2 (descending), then fewer parameters, then list order."""
    if a.adj_r_squared is None or b.adj_r_squared is None:
        if (a.adj_r_squared is None) != (b.adj_r_squared is None):
            return 1 if a.adj_r_squared is None else -1
    elif abs(a.adj_r_squared - b.adj_r_squared) > TIE_TOL:
        return -1 if a.adj_r_squared > b.adj_r_squared else 1
    if a.param_count != b.param_count:
        return a.param_count - b.param_count
    return a.index - b.index


def select_model(x, y, candidates: Sequence):
    """Fit every candidate and rank them by adjusted R-squared.

    Candidates may be :class:`BasisSpec`, :class:`ModelSpec` or model names.
    Linear-in-parameter bases use OLS; nonlinear families use the local
    optimiser from their default starting point. A candidate that cannot be
    fitted (domain violation, non-finite loss) stays in the table with its
    ``error`` set and ranks last.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ShapeMismatch("x and y differ in length")
    cands = [candidate_from_name(c) if isinstance(c, str) else c for c in candidates]
    if not cands:
        raise ValueError("no candidates given")
    need = max(_param_count(c) for c in cands) + 2
    if x.size < need:
        raise InsufficientData(f"model selection needs at least {need} points, got {x.size}")

    entries = []
    for i, cand in enumerate(cands):
        name = cand.name
        k = _param_count(cand)
        try:
            theta, y_hat = _fit_candidate(cand, x, y)
            if not np.all(np.isfinite(y_hat)):
                raise NonFinite("non-finite predictions")
        except (DomainError, NonFinite, ValueError) as exc:
            entries.append(SelectionEntry(name, cand, None, None, None, k, i, error=str(exc)))
            continue
        m = model_analysis(y, y_hat)
        entries.append(SelectionEntry(name, cand, theta, m, adjusted_r_squared(m.r_squared, x.size, k), k, i))
    return sorted(entries, key=functools.cmp_to_key(_compare))
