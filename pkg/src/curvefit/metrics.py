"""Goodness-of-fit metrics and residual diagnostics."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ShapeMismatch

# Acklam's rational approximation to the standard normal quantile function
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p):
    if p < _P_LOW:
        q = math.sqrt(-2 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
               ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1)
    if p > 1 - _P_LOW:
        return -_acklam(1 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
           (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1)


def normal_quantile(p):
    """Inverse standard normal CDF for 0 < p < 1.

    Acklam's approximation (relative error about 1e-9) refined by one Halley
    step against ``erfc``, which brings it to near machine precision.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    x = _acklam(p)
    e = 0.5 * math.erfc(-x / math.sqrt(2)) - p
    u = e * math.sqrt(2 * math.pi) * math.exp(x * x / 2)
    return x - u / (1 + x * u / 2)


def qq_positions(n):
    """Plotting positions (i - 0.5) / n, i = 1..n."""
    return (np.arange(1, n + 1) - 0.5) / n


def normal_quantiles(n):
    return np.array([normal_quantile(p) for p in qq_positions(n)])


@dataclass(frozen=True)
class Metrics:
    """R-squared, MSE and RMSE of a prediction.

    ``r_squared`` is ``None`` when the observations have zero variance, the
    one case where it is undefined.
    """

    r_squared: Optional[float]
    mse: float
    rmse: float
    n: int
    residuals: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def zero_variance(self):
        return self.r_squared is None

    def to_dict(self):
        return {"r_squared": self.r_squared, "mse": self.mse, "rmse": self.rmse, "n": self.n}


def _pair(y, y_hat):
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.shape != y_hat.shape:
        raise ShapeMismatch(f"y has {y.size} entries but y_hat has {y_hat.size}")
    if y.size < 2:
        raise ShapeMismatch("need at least two observations")
    return y, y_hat


def model_analysis(y, y_hat):
    y, y_hat = _pair(y, y_hat)
    r = y - y_hat
    n = y.size
    sse = math.fsum(r * r)
    mean = math.fsum(y) / n
    sst = math.fsum((y - mean) ** 2)
    mse = sse / n
    r2 = None if sst == 0 else 1.0 - sse / sst
    if r2 == 1.0 and sse > 0:
        # keep R^2 == 1 exactly equivalent to a zero error
        r2 = math.nextafter(1.0, 0.0)
    return Metrics(r_squared=r2, mse=mse, rmse=math.sqrt(mse), n=n, residuals=r)


def adjusted_r_squared(r2, n, k):
    """Adjusted R-squared for ``k`` fitted parameters including the intercept."""
    p = k - 1
    if r2 is None or n - p - 1 <= 0:
        return None
    return 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)


@dataclass(frozen=True)
class Diagnostics:
    fitted: np.ndarray
    residuals: np.ndarray
    qq_theoretical: np.ndarray
    qq_sample: np.ndarray


def residual_diagnostics(y, y_hat):
    """Residual-vs-fitted pairs and normal QQ coordinates of the residuals."""
    y, y_hat = _pair(y, y_hat)
    r = y - y_hat
    return Diagnostics(
        fitted=y_hat,
        residuals=r,
        qq_theoretical=normal_quantiles(r.size),
        qq_sample=np.sort(r),
    )
