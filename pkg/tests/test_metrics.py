import math
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvefit import model_analysis, residual_diagnostics
from curvefit.errors import ShapeMismatch
from curvefit.metrics import adjusted_r_squared, normal_quantile, qq_positions


def test_perfect_fit():
    m = model_analysis([1, 2, 4], [1, 2, 4])
    assert (m.r_squared, m.mse, m.rmse, m.n) == (1.0, 0.0, 0.0, 3)


def test_mean_predictor():
    y = np.array([1.0, 5.0, 2.0, 8.0])
    assert model_analysis(y, np.full(4, y.mean())).r_squared == pytest.approx(0.0, abs=1e-15)


def test_hand_example():
    m = model_analysis([1, 2, 3], [1, 2, 5])
    assert m.mse == pytest.approx(4 / 3, rel=1e-15)
    assert m.rmse == pytest.approx(2 / math.sqrt(3), rel=1e-15)
    assert m.r_squared == pytest.approx(-1.0, rel=1e-15)
    assert m.residuals.tolist() == [0, 0, -2]


def test_zero_variance_flags_r_squared():
    m = model_analysis([2, 2, 2], [1, 2, 3])
    assert m.r_squared is None and m.zero_variance
    assert m.mse == pytest.approx(2 / 3)
    assert m.to_dict() == {"r_squared": None, "mse": m.mse, "rmse": m.rmse, "n": 3}


def test_shape_errors():
    with pytest.raises(ShapeMismatch):
        model_analysis([1, 2], [1, 2, 3])
    with pytest.raises(ShapeMismatch):
        model_analysis([1], [1])


def test_r_squared_one_iff_zero_error():
    y = np.array([0.0, 1.0, 2.0])
    m = model_analysis(y, y + np.array([0, 1e-12, 0]))
    assert m.mse > 0 and m.r_squared < 1


def test_adjusted_r_squared():
    assert adjusted_r_squared(0.9, 20, 3) == pytest.approx(1 - 0.1 * 19 / 17)
    assert adjusted_r_squared(0.9, 3, 3) is None
    assert adjusted_r_squared(None, 30, 2) is None


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 50), st.integers(1, 5))
def test_adjusted_never_exceeds_raw(seed, n, k):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=n)
    r2 = model_analysis(y, y + rng.normal(size=n)).r_squared
    adj = adjusted_r_squared(r2, n, k + 1)
    if n > k + 1:
        assert adj <= r2


class TestNormalQuantile:
    @pytest.mark.parametrize("p", [1e-12, 1e-6, 0.001, 0.02, 0.02425, 0.1, 0.3, 0.5, 0.77, 0.975, 0.999999])
    def test_against_stdlib(self, p):
        assert normal_quantile(p) == pytest.approx(NormalDist().inv_cdf(p), rel=1e-9, abs=1e-12)

    def test_symmetry(self):
        for p in np.linspace(0.01, 0.49, 25):
            assert normal_quantile(p) == pytest.approx(-normal_quantile(1 - p), abs=1e-12)

    def test_domain(self):
        for p in (0, 1, -0.1):
            with pytest.raises(ValueError):
                normal_quantile(p)


class TestDiagnostics:
    def test_perfect_fit(self):
        dg = residual_diagnostics([1, 3, 2], [1, 3, 2])
        assert dg.residuals.tolist() == [0, 0, 0]

    def test_two_points(self):
        dg = residual_diagnostics([0.0, 1.0], [1.0, 0.0])
        assert qq_positions(2).tolist() == [0.25, 0.75]
        np.testing.assert_allclose(dg.qq_theoretical, [NormalDist().inv_cdf(0.25), NormalDist().inv_cdf(0.75)],
                                   rtol=1e-12)
        assert dg.qq_sample.tolist() == [-1.0, 1.0]

    def test_ols_residuals_sum_to_zero(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 10, 40)
        y = 2 * x + 1 + rng.normal(size=40)
        phi = np.column_stack([np.ones_like(x), x])
        theta = np.linalg.lstsq(phi, y, rcond=None)[0]
        dg = residual_diagnostics(y, phi @ theta)
        assert abs(dg.residuals.sum()) <= 1e-8 * np.linalg.norm(y)
        np.testing.assert_array_equal(dg.fitted, phi @ theta)


def two_pass_r2(y, yh):
    n = len(y)
    mean = sum(y) / n
    ss_res = sum((a - b) ** 2 for a, b in zip(y, yh))
    ss_tot = sum((a - mean) ** 2 for a in y)
    return 1 - ss_res / ss_tot


def loop_mse(y, yh):
    total = 0.0
    for a, b in zip(y, yh):
        total += (a - b) ** 2
    return total / len(y)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60))
def test_metric_identities(seed, n):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=n) * rng.uniform(0.1, 100)
    yh = y + rng.normal(size=n) * rng.uniform(0, 3)
    m = model_analysis(y, yh)
    assert m.rmse**2 == pytest.approx(m.mse, rel=1e-12)
    assert m.r_squared <= 1
    assert m.r_squared == pytest.approx(two_pass_r2(y.tolist(), yh.tolist()), rel=1e-12, abs=1e-12)
    assert m.mse == pytest.approx(loop_mse(y.tolist(), yh.tolist()), rel=1e-12)
    perm = rng.permutation(n)
    assert model_analysis(y[perm], yh[perm]).to_dict() == m.to_dict()
