"""Parametric model families f(x; theta) with Jacobians and starting guesses."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelSpec:
    """A named model family.

    ``evaluator(theta, x)`` and ``jacobian_fn(theta, x)`` work on float arrays.
    ``domain`` returns a boolean mask of admissible abscissae; ``None`` means
    the whole real line. Models without ``jacobian_fn`` are differentiated by
    central finite differences.
    """

    name: str
    param_count: int
    evaluator: Evaluator
    jacobian_fn: Optional[Evaluator] = None
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None
    init_fn: Optional[Callable] = None
    formula: str = ""

    @property
    def jacobian_kind(self):
        return "analytic" if self.jacobian_fn is not None else "finite-difference"


def _check_theta(spec, theta):
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != spec.param_count:
        raise ValueError(f"{spec.name} takes {spec.param_count} parameters, got {theta.size}")
    return theta


def check_domain(spec, x):
    x = np.asarray(x, dtype=float).ravel()
    if spec.domain is not None and x.size:
        bad = np.flatnonzero(~spec.domain(x))
        if bad.size:
            raise DomainError(int(bad[0]), f"x[{bad[0]}]={x[bad[0]]!r} is outside the {spec.name} domain")
    return x


def evaluate(spec, theta, x):
    """Evaluate ``spec`` elementwise at ``x``."""
    theta = _check_theta(spec, theta)
    x = check_domain(spec, x)
    if x.size == 0:
        return np.empty(0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return np.asarray(spec.evaluator(theta, x), dtype=float) * np.ones_like(x)


def fd_step(theta):
    return np.maximum(1e-6, 1e-6 * np.abs(theta))


def finite_difference_jacobian(spec, theta, x):
    """Central-difference Jacobian, step max(1e-6, 1e-6*|theta_j|)."""
    theta = _check_theta(spec, theta)
    x = check_domain(spec, x)
    J = np.empty((x.size, theta.size))
    h = fd_step(theta)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for j in range(theta.size):
            tp = theta.copy()
            tm = theta.copy()
            tp[j] += h[j]
            tm[j] -= h[j]
            J[:, j] = (spec.evaluator(tp, x) - spec.evaluator(tm, x)) / (2 * h[j])
    return J


def jacobian(spec, theta, x):
    """Matrix of partial derivatives d f(x_i) / d theta_j."""
    if spec.jacobian_fn is None:
        return finite_difference_jacobian(spec, theta, x)
    theta = _check_theta(spec, theta)
    x = check_domain(spec, x)
    if x.size == 0:
        return np.empty((0, theta.size))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        J = np.asarray(spec.jacobian_fn(theta, x), dtype=float)
    return J.reshape(x.size, theta.size)


# --- builtin families ---------------------------------------------------------

def _positive(x):
    return x > 0


def _basis_init(basis):
    """Starting guess from exact linear least squares in the family's basis."""
    def init(x, y):
        A = basis(x)
        theta, *_ = np.linalg.lstsq(A, y, rcond=None)
        return theta
    return init


def _exp_init(x, y):
    keep = y != 0
    if keep.sum() < 2:
        return None
    sign = 1.0 if y[keep].sum() >= 0 else -1.0
    slope, intercept = np.polyfit(x[keep], np.log(np.abs(y[keep])), 1)
    return np.array([sign * np.exp(intercept), slope])


def _power_init(x, y):
    if not (np.all(x > 0) and np.all(y > 0)) or x.size < 2:
        return np.array([1.0, 1.0])
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return np.array([np.exp(intercept), slope])


def _gauss_init(x, y):
    if x.size < 2:
        return None
    k = int(np.argmax(np.abs(y)))
    s = float(np.std(x, ddof=1))
    a = float(y[k])
    if s <= 0 or a == 0:
        return None
    return np.array([a, float(x[k]), s])


def _gauss_eval(t, x):
    a, m, s = t
    return a * np.exp(-((x - m) ** 2) / (2 * s * s))


def _gauss_jac(t, x):
    a, m, s = t
    g = np.exp(-((x - m) ** 2) / (2 * s * s))
    sa = abs(s)
    return np.column_stack([
        g,
        a * g * (x - m) / (s * s),
        a * g * (x - m) ** 2 / sa**3 * np.sign(s),
    ])


def _power_eval(t, x):
    return t[0] * x ** t[1]


def _power_jac(t, x):
    p = x ** t[1]
    return np.column_stack([p, t[0] * p * np.log(x)])


_BUILTINS = (
    ModelSpec(
        "linear", 2,
        lambda t, x: t[0] * x + t[1],
        lambda t, x: np.column_stack([x, np.ones_like(x)]),
        init_fn=_basis_init(lambda x: np.column_stack([x, np.ones_like(x)])),
        formula="a*x + b",
    ),
    ModelSpec(
        "quadratic", 3,
        lambda t, x: (t[0] * x + t[1]) * x + t[2],
        lambda t, x: np.column_stack([x * x, x, np.ones_like(x)]),
        init_fn=_basis_init(lambda x: np.column_stack([x * x, x, np.ones_like(x)])),
        formula="a*x^2 + b*x + c",
    ),
    ModelSpec(
        "cubic", 4,
        lambda t, x: ((t[0] * x + t[1]) * x + t[2]) * x + t[3],
        lambda t, x: np.column_stack([x**3, x * x, x, np.ones_like(x)]),
        init_fn=_basis_init(lambda x: np.column_stack([x**3, x * x, x, np.ones_like(x)])),
        formula="a*x^3 + b*x^2 + c*x + d",
    ),
    ModelSpec(
        "sinusoidal", 2,
        lambda t, x: t[0] * np.sin(x) + t[1] * np.cos(x),
        lambda t, x: np.column_stack([np.sin(x), np.cos(x)]),
        init_fn=_basis_init(lambda x: np.column_stack([np.sin(x), np.cos(x)])),
        formula="a*sin(x) + b*cos(x)",
    ),
    ModelSpec(
        "logarithmic", 2,
        lambda t, x: t[0] * np.log(x) + t[1],
        lambda t, x: np.column_stack([np.log(x), np.ones_like(x)]),
        domain=_positive,
        init_fn=_basis_init(lambda x: np.column_stack([np.log(x), np.ones_like(x)])),
        formula="a*ln(x) + b",
    ),
    ModelSpec(
        "exponential", 2,
        lambda t, x: t[0] * np.exp(t[1] * x),
        lambda t, x: np.column_stack([np.exp(t[1] * x), t[0] * x * np.exp(t[1] * x)]),
        init_fn=_exp_init,
        formula="a*exp(b*x)",
    ),
    ModelSpec(
        "gaussian", 3,
        _gauss_eval,
        _gauss_jac,
        init_fn=_gauss_init,
        formula="a*exp(-(x-m)^2 / (2*s^2))",
    ),
    ModelSpec(
        "power", 2,
        _power_eval,
        _power_jac,
        domain=_positive,
        init_fn=_power_init,
        formula="a*x^b",
    ),
)

MODEL_NAMES = tuple(m.name for m in _BUILTINS)


def builtin_models():
    return list(_BUILTINS)


def get_model(name):
    for m in _BUILTINS:
        if m.name == name:
            return m
    raise KeyError(f"unknown model {name!r}; valid names: {', '.join(MODEL_NAMES)}")


def default_init(spec, d):
    """Data-driven starting point for fitting ``spec`` to the complete dataset ``d``.

    Falls back to an all-ones vector whenever the family heuristic is
    degenerate (non-finite, too few usable points, outside the domain).
    """
    x = np.asarray(d.x, dtype=float)
    y = np.asarray(d.y, dtype=float)
    fallback = np.ones(spec.param_count)
    if spec.init_fn is None:
        return fallback
    if spec.domain is not None and not np.all(spec.domain(x)):
        return fallback
    try:
        with np.errstate(all="ignore"):
            theta = spec.init_fn(x, y)
    except (np.linalg.LinAlgError, ValueError):
        return fallback
    if theta is None:
        return fallback
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.param_count,) or not np.all(np.isfinite(theta)):
        return fallback
    return theta
