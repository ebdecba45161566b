"""Savitzky-Golay smoothing on uniformly spaced samples."""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, TooShort


@dataclass(frozen=True)
class SGConfig:
    """Window of ``2 * half_window + 1`` points, local polynomial of ``degree``."""

    half_window: int
    degree: int

    def __post_init__(self):
        if self.half_window < 1:
            raise InvalidConfig("half_window must be a positive integer")
        if self.degree < 0:
            raise InvalidConfig("degree must be non-negative")
        if self.degree > 2 * self.half_window:
            raise InvalidConfig(
                f"degree {self.degree} exceeds 2*half_window={2 * self.half_window}; "
                "the local fit would be underdetermined"
            )

    @property
    def window(self):
        return 2 * self.half_window + 1


def _fit_weights(w, d, t):
    """Weights whose dot product with a window equals the local fit evaluated at offset ``t``.

    Offsets are scaled by 1/w before building the Vandermonde matrix, which
    keeps the normal equations well conditioned for wide windows.
    """
    u = np.arange(-w, w + 1) / w
    V = np.vander(u, d + 1, increasing=True)
    v = (np.asarray(t, dtype=float) / w)[..., None] ** np.arange(d + 1)
    # normal equations (V^T V) c = v^T; the weights are V c
    coef = np.linalg.solve(V.T @ V, np.atleast_2d(v).T)
    return (V @ coef).T


def sg_coefficients(cfg):
    """Convolution weights C_{-w} .. C_w for the window centre."""
    c = _fit_weights(cfg.half_window, cfg.degree, [0.0])[0]
    # exact symmetry; solve() can leave last-ulp asymmetry
    return 0.5 * (c + c[::-1])


def _check_uniform(x):
    x = np.asarray(x, dtype=float)
    dx = np.diff(x)
    if dx.size and not np.allclose(dx, dx[0], rtol=1e-8, atol=1e-12 * max(1.0, np.abs(x).max())):
        warnings.warn("x is not uniformly spaced; smoothing on index positions", stacklevel=3)


def savitzky_golay(y, cfg, x=None):
    """Smooth ``y`` with a Savitzky-Golay filter.

    Interior points use the fixed convolution weights. The first and last
    ``half_window`` points take the polynomial fitted to the nearest full
    window evaluated at their own offset, so polynomials of degree up to
    ``cfg.degree`` pass through unchanged everywhere.

    Parameters
    ----------
    y : array_like
        Samples on a uniform grid, no missing values.
    cfg : SGConfig
    x : array_like, optional
        Abscissae; only used to warn when the grid is not uniform.
    """
    y = np.asarray(y, dtype=float).ravel()
    w, d = cfg.half_window, cfg.degree
    n = y.size
    if n < cfg.window:
        raise TooShort(f"series of length {n} is shorter than the window {cfg.window}")
    if np.isnan(y).any():
        raise ValueError("series has missing values; impute first")
    if x is not None:
        _check_uniform(x)

    out = np.empty(n)
    c = sg_coefficients(cfg)
    windows = np.lib.stride_tricks.sliding_window_view(y, cfg.window)
    out[w:n - w] = windows @ c

    edge = _fit_weights(w, d, np.arange(-w, 0))
    out[:w] = edge @ y[:cfg.window]
    # trailing edge is the mirror image of the leading one
    out[n - w:] = (edge[::-1, ::-1] @ y[n - cfg.window:])
    return out
