"""Descriptive summary statistics over the present values of a series."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import NoObservedValues

FIELDS = ("mean", "std", "min", "max", "median", "count", "unique_count", "skewness", "excess_kurtosis")


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    min: float
    max: float
    median: float
    count: int
    unique_count: int
    skewness: float
    excess_kurtosis: float
    degenerate: bool = False

    def to_dict(self):
        d = asdict(self)
        return {k: d[k] for k in FIELDS}


def summary_statistics(x):
    """Summarise a vector whose missing entries are NaN (or ``None``).

    ``std`` uses the n-1 denominator. Skewness and excess kurtosis standardise
    by the population (n) standard deviation and are defined as 0 for a
    zero-variance series. With a single present value ``std`` is 0 and the
    ``degenerate`` flag is set.
    """
    arr = np.array(x, dtype=float).ravel()
    # sorting first makes every reduction below independent of input order
    v = np.sort(arr[~np.isnan(arr)])
    n = v.size
    if n == 0:
        raise NoObservedValues("no present values to summarise")
    constant = v[0] == v[-1]
    mean = float(v[0]) if constant else math.fsum(v) / n
    dev = v - mean
    ss = math.fsum(dev * dev)
    std = math.sqrt(ss / (n - 1)) if n > 1 else 0.0
    if not constant and ss > 0:
        z = dev / math.sqrt(ss / n)
        skew = math.fsum(z**3) / n
        kurt = math.fsum(z**4) / n - 3.0
    else:
        std, skew, kurt = 0.0, 0.0, 0.0
    return SummaryStats(
        mean=mean,
        std=std,
        min=float(v.min()),
        max=float(v.max()),
        median=float(np.median(v)),
        count=int(n),
        unique_count=int(np.unique(v.view(np.uint64)).size),
        skewness=skew,
        excess_kurtosis=kurt,
        degenerate=n == 1,
    )
