import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvefit import summary_statistics
from curvefit.errors import NoObservedValues


def naive(values):
    """Two-pass textbook formulas over plain Python floats."""
    n = len(values)
    mean = sum(values) / n
    dev = [v - mean for v in values]
    ss = sum(d * d for d in dev)
    std = math.sqrt(ss / (n - 1))
    pop = math.sqrt(ss / n)
    skew = sum((d / pop) ** 3 for d in dev) / n
    kurt = sum((d / pop) ** 4 for d in dev) / n - 3
    s = sorted(values)
    med = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    return dict(mean=mean, std=std, min=s[0], max=s[-1], median=med, skewness=skew, excess_kurtosis=kurt)


def test_eight_values():
    x = [2, 4, 4, 4, 5, 5, 7, 9]
    s = summary_statistics(x)
    ref = naive([float(v) for v in x])
    assert s.mean == 5
    assert s.std == pytest.approx(math.sqrt(32 / 7), rel=1e-15)
    assert round(s.std, 3) == 2.138
    assert (s.min, s.max, s.median, s.count, s.unique_count) == (2, 9, 4.5, 8, 5)
    assert s.skewness == pytest.approx(ref["skewness"], rel=1e-12)
    assert s.excess_kurtosis == pytest.approx(ref["excess_kurtosis"], rel=1e-12)


@pytest.mark.parametrize("c", [0.1, -3.7, 1e6, 0.0])
def test_constant(c):
    s = summary_statistics([c, c, c])
    assert (s.mean, s.std, s.skewness, s.excess_kurtosis) == (c, 0.0, 0.0, 0.0)
    assert s.unique_count == 1


def test_missing_excluded():
    s = summary_statistics([1, None, 3])
    assert (s.count, s.mean) == (2, 2)
    s = summary_statistics(np.array([1, np.nan, 3]))
    assert (s.count, s.mean) == (2, 2)


def test_single_value_is_degenerate():
    s = summary_statistics([4.0])
    assert s.degenerate and s.std == 0 and s.count == 1


def test_no_values():
    with pytest.raises(NoObservedValues):
        summary_statistics([None, np.nan])


def test_unique_count_is_bitwise():
    assert summary_statistics([0.0, -0.0, 1.0]).unique_count == 3


def test_to_dict_has_nine_fields():
    assert list(summary_statistics([1, 2]).to_dict()) == [
        "mean", "std", "min", "max", "median", "count", "unique_count", "skewness", "excess_kurtosis",
    ]


@pytest.mark.parametrize("n", [3, 100, 10_000, 100_000])
def test_agrees_with_naive_oracle(n):
    rng = np.random.default_rng(n)
    x = rng.gamma(2.0, 3.0, n) - 4.0
    s = summary_statistics(x)
    ref = naive(x.tolist())
    for k, v in ref.items():
        assert getattr(s, k) == pytest.approx(v, rel=1e-12, abs=1e-12), k


finite = st.floats(-1e3, 1e3, allow_nan=False).map(lambda v: round(v, 3))


@settings(max_examples=150, deadline=None)
@given(st.lists(finite, min_size=2, max_size=40), finite, st.floats(0.01, 100))
def test_translation_and_scale(xs, c, a):
    x = np.array(xs)
    base = summary_statistics(x)
    shifted = summary_statistics(x + c)
    scaled = summary_statistics(a * x)
    tol = 1e-10 * (1 + np.abs(x).max() + abs(c))
    assert shifted.mean == pytest.approx(base.mean + c, abs=tol)
    assert shifted.min == pytest.approx(base.min + c, abs=tol)
    assert shifted.median == pytest.approx(base.median + c, abs=tol)
    assert scaled.mean == pytest.approx(a * base.mean, abs=tol * a)
    assert scaled.std == pytest.approx(a * base.std, abs=tol * a)
    assert shifted.count == base.count
    if base.std > 0.1:
        assert shifted.std == pytest.approx(base.std, abs=tol)
        assert shifted.skewness == pytest.approx(base.skewness, abs=1e-10)
        assert shifted.excess_kurtosis == pytest.approx(base.excess_kurtosis, abs=1e-10)
        assert scaled.skewness == pytest.approx(base.skewness, abs=1e-10)
        assert scaled.excess_kurtosis == pytest.approx(base.excess_kurtosis, abs=1e-10)
    assert base.min <= base.median <= base.max
    assert base.unique_count <= base.count
    assert (base.std == 0) == (len(set(xs)) == 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30), st.randoms())
def test_permutation_invariance(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert summary_statistics(xs) == summary_statistics(ys)
