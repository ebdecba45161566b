"""Missing-value strategies for paired datasets.

Every strategy except ``drop`` first removes rows whose x is missing, then
fills the missing y entries. Present values are never altered.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import local, models
from .dataset import Dataset, complete_pairs
from .errors import InsufficientData, NoObservedValues
from .models import ModelSpec

KINDS = ("drop", "mean", "median", "interpolate_linear", "ffill", "bfill", "model")
_CLI_ALIASES = {"linear": "interpolate_linear"}


@dataclass(frozen=True)
class ImputeStrategy:
    kind: str
    model: Optional[ModelSpec] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if (self.kind == "model") != (self.model is not None):
            raise ValueError("the model strategy, and only it, needs a ModelSpec")

    @property
    def label(self):
        if self.kind == "model":
            return f"model:{self.model.name}"
        return {v: k for k, v in _CLI_ALIASES.items()}.get(self.kind, self.kind)


def parse_strategy(text):
    """Parse CLI names: drop, mean, median, linear, ffill, bfill, model:<name>."""
    if text.startswith("model:"):
        return ImputeStrategy("model", models.get_model(text.split(":", 1)[1]))
    if text == "model":
        raise ValueError("the model strategy is written model:<model-name>")
    return ImputeStrategy(_CLI_ALIASES.get(text, text))


def _ffill(y, present):
    idx = np.where(present, np.arange(y.size), -1)
    np.maximum.accumulate(idx, out=idx)
    out = y.copy()
    ok = idx >= 0
    out[ok] = y[idx[ok]]
    return out, ok


def _bfill(y, present):
    out, ok = _ffill(y[::-1], present[::-1])
    return out[::-1], ok[::-1]


def impute(d, strategy):
    """Return a dataset with no missing entries according to ``strategy``."""
    if strategy.kind == "drop":
        return complete_pairs(d)

    keep = d.x_present
    if not keep.any():
        raise NoObservedValues("every x value is missing")
    x = np.asarray(d.x[keep], dtype=float)
    y = np.asarray(d.y[keep], dtype=float)
    present = d.y_present[keep]
    if not present.any():
        raise NoObservedValues("no y value is present")
    if present.all():
        return Dataset(x, y)

    kind = strategy.kind
    out = y.copy()
    gaps = ~present
    if kind == "mean":
        out[gaps] = np.mean(y[present])
    elif kind == "median":
        out[gaps] = np.median(y[present])
    elif kind == "interpolate_linear":
        order = np.argsort(x[present], kind="stable")
        xp, yp = x[present][order], y[present][order]
        # np.interp clamps to the end values outside [xp[0], xp[-1]]
        out[gaps] = np.interp(x[gaps], xp, yp)
    elif kind in ("ffill", "bfill"):
        first, second = (_ffill, _bfill) if kind == "ffill" else (_bfill, _ffill)
        out, ok = first(y, present)
        if not ok.all():
            back, _ = second(y, present)
            out[~ok] = back[~ok]
    elif kind == "model":
        spec = strategy.model
        obs = Dataset(x[present], y[present])
        if len(obs) < spec.param_count:
            raise InsufficientData(
                f"{spec.name} needs {spec.param_count} complete pairs, found {len(obs)}"
            )
        res = local.fit(spec, obs, models.default_init(spec, obs))
        out[gaps] = models.evaluate(spec, res.theta_hat, x[gaps])
    out[present] = y[present]
    return Dataset(x, out)
