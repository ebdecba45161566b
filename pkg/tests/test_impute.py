import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from curvefit import Dataset, ImputeStrategy, complete_pairs, get_model, impute
from curvefit.errors import AllMissing, InsufficientData, NoObservedValues
from curvefit.impute import parse_strategy

ALL = [ImputeStrategy(k) for k in ("drop", "mean", "median", "interpolate_linear", "ffill", "bfill")] + [
    ImputeStrategy("model", get_model("linear"))
]


def ys(*vals):
    return Dataset.from_values(list(range(1, len(vals) + 1)), list(vals))


def test_mean():
    assert impute(ys(1, None, 3), ImputeStrategy("mean")).y.tolist() == [1, 2, 3]


def test_median():
    assert impute(ys(1, None, 3, 10), ImputeStrategy("median")).y.tolist() == [1, 3, 3, 10]


def test_ffill_with_leading_gap():
    assert impute(ys(None, 7, None), ImputeStrategy("ffill")).y.tolist() == [7, 7, 7]


def test_bfill_with_trailing_gap():
    assert impute(ys(None, 1, None, 4, None), ImputeStrategy("bfill")).y.tolist() == [1, 1, 4, 4, 4]
    assert impute(ys(None, 1, None, 4, None), ImputeStrategy("ffill")).y.tolist() == [1, 1, 1, 4, 4]


def test_linear_interpolation():
    d = Dataset.from_values([1, 2, 3], [2, None, 6])
    assert impute(d, ImputeStrategy("interpolate_linear")).y.tolist() == [2, 4, 6]


def test_interpolation_uses_x_order_and_clamps_extremes():
    d = Dataset.from_values([3, 0, 1, 5, 2], [30, None, 10, None, None])
    out = impute(d, ImputeStrategy("interpolate_linear"))
    assert out.y.tolist() == [30, 10, 10, 30, 20]


def test_model_strategy():
    d = Dataset.from_values([1, 2, 3, 4], [5, None, 11, 14])
    out = impute(d, ImputeStrategy("model", get_model("linear")))
    assert out.y[1] == pytest.approx(3 * 2 + 2, rel=1e-9)


def test_model_needs_enough_pairs():
    with pytest.raises(InsufficientData):
        impute(Dataset.from_values([1, 2, 3], [5, None, None]), ImputeStrategy("model", get_model("quadratic")))


def test_missing_x_rows_are_dropped():
    d = Dataset.from_values([1, None, 3], [1, 2, None])
    out = impute(d, ImputeStrategy("mean"))
    assert out.x.tolist() == [1, 3] and out.y.tolist() == [1, 1]


def test_no_observed_values():
    with pytest.raises(NoObservedValues):
        impute(ys(None, None), ImputeStrategy("mean"))
    with pytest.raises(AllMissing):
        impute(ys(None, None), ImputeStrategy("drop"))


def test_parse_strategy():
    assert parse_strategy("linear").kind == "interpolate_linear"
    assert parse_strategy("model:power").model.name == "power"
    assert parse_strategy("ffill").label == "ffill"
    assert parse_strategy("linear").label == "linear"
    for bad in ("model", "spline", "model:nope"):
        with pytest.raises((ValueError, KeyError)):
            parse_strategy(bad)


def test_strategy_validation():
    with pytest.raises(ValueError):
        ImputeStrategy("model")
    with pytest.raises(ValueError):
        ImputeStrategy("mean", get_model("linear"))


@st.composite
def patterns(draw):
    n = draw(st.integers(2, 25))
    x = np.arange(n, dtype=float) + draw(st.floats(-5, 5))
    y = np.array(draw(st.lists(st.floats(-100, 100), min_size=n, max_size=n)))
    miss = np.array(draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    if miss.all():
        miss[draw(st.integers(0, n - 1))] = False
    return Dataset(x, y, y_present=~miss)


@settings(max_examples=500, deadline=None)
@given(patterns(), st.sampled_from(ALL))
def test_imputation_properties(d, strategy):
    assume(strategy.kind != "model" or d.y_present.sum() >= strategy.model.param_count)
    out = impute(d, strategy)
    assert out.is_complete
    present = d.y_present
    if strategy.kind == "drop":
        assert out == complete_pairs(d)
    else:
        np.testing.assert_array_equal(out.y[present], d.y[present])
        np.testing.assert_array_equal(out.x, d.x)
    if strategy.kind == "mean":
        assert np.mean(out.y) == pytest.approx(np.mean(d.y[present]), abs=1e-12 * (1 + np.abs(d.y[present]).max()))
    assert impute(out, strategy) == out
