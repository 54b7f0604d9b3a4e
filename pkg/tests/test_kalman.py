import numpy as np
import pytest

from smcem import derive_stream, kalman_smoother, make_model

from _oracles import gaussian_conditional_moments


def test_exact_observation_limit():
    model = make_model("full_ar")
    theta = {"a": 0.8, "sigma_w": 1.0, "sigma_v": 1.0}
    _, y = model.simulate(theta, 200, derive_stream(1, 0))
    means, variances, resid2 = kalman_smoother(0.8, 1.0, 1e-8, y, lag=20)
    assert np.allclose(means, y, atol=1e-6)
    assert np.all(resid2 < 1e-12)


def test_independent_chain_reduces_to_conjugate_posterior():
    # a = 0: X_k are independent N(0, sigma_w^2); the smoother must match the
    # one-observation conjugate posterior whatever the lag.
    rng = np.random.default_rng(2)
    sw, sv = 1.3, 0.7
    y = rng.normal(0.0, np.hypot(sw, sv), 50)
    means, variances, resid2 = kalman_smoother(0.0, sw, sv, y, lag=5)
    shrink = sw**2 / (sw**2 + sv**2)
    post_var = sw**2 * sv**2 / (sw**2 + sv**2)
    assert np.allclose(means, shrink * y, atol=1e-12)
    assert np.allclose(variances, post_var, atol=1e-12)
    assert np.allclose(resid2, (y - shrink * y) ** 2 + post_var, atol=1e-12)


@pytest.mark.parametrize("lag", [0, 1, 2, 5])
def test_three_step_moments_match_dense_gaussian(lag):
    rng = np.random.default_rng(3)
    a, sw, sv = 0.6, 1.1, 0.9
    y = rng.normal(0.0, 2.0, 3)
    means, variances, _ = kalman_smoother(a, sw, sv, y, lag)
    for k in (1, 2, 3):
        upto = min(k + lag, 3)
        m, v = gaussian_conditional_moments(a, sw, sv, y, k, upto)
        assert means[k - 1] == pytest.approx(m, rel=1e-10, abs=1e-12)
        assert variances[k - 1] == pytest.approx(v, rel=1e-10, abs=1e-12)


def test_full_lag_equals_complete_smoother_on_longer_series():
    rng = np.random.default_rng(4)
    a, sw, sv = 0.9, 1.0, 2.0
    T = 40
    y = rng.normal(0.0, 3.0, T)
    means, variances, _ = kalman_smoother(a, sw, sv, y, lag=T)
    for k in (1, 7, 23, T):
        m, v = gaussian_conditional_moments(a, sw, sv, y, k, T)
        assert means[k - 1] == pytest.approx(m, rel=1e-9, abs=1e-11)
        assert variances[k - 1] == pytest.approx(v, rel=1e-9, abs=1e-11)
