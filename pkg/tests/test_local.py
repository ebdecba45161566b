import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvefit import Dataset, LocalConfig, default_init, evaluate, fit, get_model, jacobian, rss
from curvefit.errors import DomainError, NonFinite
from curvefit.local import METHODS, gradient, residuals
from curvefit.regress import ols_fit

from conftest import exp_data


def test_rss_examples(line_data):
    assert rss(get_model("linear"), (3, 4), line_data) == 0.0
    assert rss(get_model("linear"), (0, 0), Dataset([1.0], [2.0])) == 4.0


def test_rss_rejects_incomplete():
    with pytest.raises(ValueError):
        rss(get_model("linear"), (1, 1), Dataset.from_values([1, 2], [1, None]))


def test_config_validation():
    with pytest.raises(ValueError):
        LocalConfig(max_iter=0)
    with pytest.raises(ValueError):
        LocalConfig(loss_tol=0)
    with pytest.raises(ValueError):
        LocalConfig(method="newton")


class TestLevenbergMarquardt:
    def test_noise_free_exponential(self, exp_clean):
        spec = get_model("exponential")
        r = fit(spec, exp_clean, default_init(spec, exp_clean))
        assert abs(r.theta_hat[0] - 5) <= 1e-6 and abs(r.theta_hat[1] - 0.7) <= 1e-6
        assert r.converged and r.method == "levenberg_marquardt"

    def test_noise_free_from_poor_start(self, exp_clean):
        r = fit(get_model("exponential"), exp_clean, (1.0, 0.1))
        np.testing.assert_allclose(r.theta_hat, [5, 0.7], atol=1e-6)

    def test_low_noise_exponential(self):
        spec = get_model("exponential")
        est = []
        for seed in range(10):
            d = exp_data(0.01, seed)
            est.append(fit(spec, d, default_init(spec, d)).theta_hat)
        a, b = np.mean(est, axis=0)
        assert abs(a - 5) <= 0.05 and abs(b - 0.7) <= 0.005

    def test_fixed_point(self, line_data):
        spec = get_model("linear")
        r = fit(spec, line_data, (3.0, 4.0))
        assert r.converged and r.iterations <= 2
        assert r.loss == rss(spec, (3.0, 4.0), line_data)

    def test_fixed_point_with_noise(self):
        x = np.linspace(0, 1, 30)
        y = 2 * x + 1 + np.random.default_rng(0).normal(0, 0.1, 30)
        d = Dataset(x, y)
        phi = np.column_stack([x, np.ones_like(x)])
        opt = ols_fit(phi, y)
        r = fit(get_model("linear"), d, opt)
        assert r.converged and r.iterations <= 2
        assert r.loss <= rss(get_model("linear"), opt, d)

    @pytest.mark.parametrize("name,theta", [
        ("linear", (3, 4)), ("quadratic", (2, -5, 3)), ("cubic", (0.3, -1, 2, 6)), ("sinusoidal", (5, 2)),
    ])
    def test_reaches_ols_on_linear_families(self, name, theta):
        spec = get_model(name)
        x = np.linspace(-2, 3, 60)
        y = evaluate(spec, theta, x) + np.random.default_rng(1).normal(0, 0.3, x.size)
        d = Dataset(x, y)
        r = fit(spec, d, np.zeros(spec.param_count))
        ref = ols_fit(jacobian(spec, np.zeros(spec.param_count), x), y)
        np.testing.assert_allclose(r.theta_hat, ref, rtol=1e-8, atol=1e-10)
        assert r.iterations <= 100

    def test_logarithmic_rejects_out_of_domain_data(self):
        with pytest.raises(DomainError):
            fit(get_model("logarithmic"), Dataset([-1.0, 2.0], [0.0, 1.0]), (1, 1))

    def test_non_finite_start(self):
        d = Dataset(np.linspace(0, 1000, 10), np.ones(10))
        with pytest.raises(NonFinite):
            fit(get_model("exponential"), d, (1.0, 5.0))
        with pytest.raises(NonFinite):
            fit(get_model("linear"), d, (np.nan, 1.0))

    def test_loss_is_recomputed_rss(self):
        d = exp_data(1.0, 3)
        spec = get_model("exponential")
        r = fit(spec, d, (4.0, 0.6))
        assert r.loss == pytest.approx(rss(spec, r.theta_hat, d), rel=1e-12)


@pytest.mark.parametrize("method", METHODS)
def test_every_method_improves_exponential(method):
    spec = get_model("exponential")
    d = exp_data(0.1, 0)
    start = (3.0, 0.5)
    r = fit(spec, d, start, LocalConfig(method=method, max_iter=500))
    assert r.loss <= rss(spec, start, d)
    assert r.method == method
    if r.converged:
        assert r.iterations <= 500


def test_nelder_mead_converges_on_linear(line_data):
    r = fit(get_model("linear"), line_data, (1.0, 1.0), LocalConfig(method="nelder_mead", max_iter=2000))
    np.testing.assert_allclose(r.theta_hat, [3, 4], atol=1e-4)


def test_gradient_descent_on_quadratic_bowl():
    x = np.linspace(-1, 1, 21)
    d = Dataset(x, 2 * x + 1)
    r = fit(get_model("linear"), d, (0.0, 0.0), LocalConfig(method="gradient_descent", max_iter=5000))
    np.testing.assert_allclose(r.theta_hat, [2, 1], atol=1e-4)


def test_gradient_definition():
    spec = get_model("gaussian")
    x = np.linspace(-2, 2, 15)
    d = Dataset(x, np.cos(x))
    theta = np.array([1.2, 0.3, 0.9])
    J = jacobian(spec, theta, x)
    r = d.y - evaluate(spec, theta, x)
    ref = np.array([-2 * sum(J[i, j] * r[i] for i in range(x.size)) for j in range(3)])
    np.testing.assert_allclose(gradient(spec, theta, d), ref, rtol=1e-12)
    np.testing.assert_array_equal(residuals(spec, theta, d), r)


def test_determinism():
    spec = get_model("gaussian")
    x = np.linspace(-3, 3, 40)
    d = Dataset(x, 1.5 * np.exp(-(x - 0.4) ** 2 / 1.2) + 0.01 * np.sin(7 * x))
    for method in METHODS:
        a = fit(spec, d, (1, 0, 1), LocalConfig(method=method))
        b = fit(spec, d, (1, 0, 1), LocalConfig(method=method))
        assert a.theta_hat.tobytes() == b.theta_hat.tobytes() and a == b


@settings(max_examples=40, deadline=None)
@given(
    st.sampled_from(["exponential", "gaussian", "power", "logarithmic", "cubic"]),
    st.sampled_from(METHODS),
    st.integers(0, 10_000),
)
def test_monotone_non_worsening(name, method, seed):
    rng = np.random.default_rng(seed)
    spec = get_model(name)
    x = np.sort(rng.uniform(0.2, 3, 25))
    y = rng.normal(0, 1, 25) + x
    d = Dataset(x, y)
    init = rng.uniform(0.3, 1.5, spec.param_count)
    r = fit(spec, d, init, LocalConfig(method=method, max_iter=50))
    assert r.loss <= rss(spec, init, d)
    assert np.all(np.isfinite(r.theta_hat))
