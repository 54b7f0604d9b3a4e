import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smcem import (
    ConfigError,
    DegenerateWeightsError,
    derive_stream,
    ess,
    init_particles,
    make_model,
    resample,
    step,
)

MODEL = make_model("simplified_ar")
THETA = {"sigma_v2": 30.0}


def fresh_system(N=64, delta=4, seed=0, **kwargs):
    gen = derive_stream(seed, 0).generator()
    return init_particles(MODEL, THETA, N, delta, gen, **kwargs), gen


class TestInit:
    def test_single_particle_uniform_weight(self):
        ps, _ = fresh_system(N=1)
        assert ps.weights == pytest.approx([1.0])
        assert ps.t == 1

    def test_initial_states_have_stationary_variance(self):
        model = make_model("full_ar")
        theta = {"a": 0.0, "sigma_w": 1.0, "sigma_v": 1.0}
        gen = derive_stream(3, 0).generator()
        ps = init_particles(model, theta, 100_000, 1, gen)
        se = math.sqrt(2.0 / (ps.N - 1))
        assert abs(ps.states.var(ddof=1) - 1.0) < 3 * se

    def test_same_seed_identical_particles(self):
        a, _ = fresh_system(seed=9)
        b, _ = fresh_system(seed=9)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.weights, b.weights)

    def test_bad_configuration_rejected(self):
        gen = derive_stream(0, 0).generator()
        with pytest.raises(ConfigError):
            init_particles(MODEL, THETA, 0, 4, gen)
        with pytest.raises(ConfigError):
            init_particles(make_model("full_ar"),
                           {"a": 1.01, "sigma_w": 1.0, "sigma_v": 1.0}, 10, 4, gen)
        with pytest.raises(ConfigError):  # pair statistics need lag >= 1
            init_particles(make_model("full_ar"),
                           {"a": 0.5, "sigma_w": 1.0, "sigma_v": 1.0}, 10, 0, gen)


class TestEss:
    def test_uniform_weights(self):
        assert ess(np.full(100, 0.01)) == pytest.approx(100.0)

    def test_point_mass(self):
        assert ess(np.array([1.0, 0.0, 0.0])) == pytest.approx(1.0)

    def test_direct_evaluation(self):
        assert ess(np.array([0.9, 0.05, 0.05])) == pytest.approx(1.0 / 0.815)
        assert ess(np.array([0.9, 0.05, 0.05])) == pytest.approx(1.2270, abs=5e-5)

    @settings(deadline=None, max_examples=200)
    @given(st.lists(st.floats(1e-9, 1.0), min_size=1, max_size=300))
    def test_bounds(self, raw):
        w = np.array(raw)
        w /= w.sum()
        assert 1.0 - 1e-9 <= ess(w) <= len(w) + 1e-9


class TestResample:
    def test_uniform_weights_systematic_is_permutation(self):
        ps, gen = fresh_system(N=128)
        states_before = ps.states.copy()
        resample(ps, gen, scheme="systematic")
        assert sorted(ps.states) == sorted(states_before)

    @pytest.mark.parametrize("scheme", ["systematic", "multinomial"])
    def test_point_mass_clones_single_particle(self, scheme):
        ps, gen = fresh_system(N=4)
        ps.weights = np.array([1.0, 1e-300, 1e-300, 1e-300])
        winner = ps.states[0]
        resample(ps, gen, scheme=scheme)
        assert np.all(ps.states == winner)
        assert ps.weights == pytest.approx(np.full(4, 0.25))

    @pytest.mark.parametrize("scheme", ["systematic", "multinomial"])
    @pytest.mark.parametrize("h", [lambda x: x, lambda x: x * x, np.sin])
    def test_unbiasedness(self, scheme, h):
        N = 32
        gen = np.random.default_rng(12)
        states = gen.normal(0.0, 2.0, N)
        w = gen.random(N)
        w /= w.sum()
        target = float(w @ h(states))
        draws = np.empty(10_000)
        for i in range(draws.size):
            ps, _ = fresh_system(N=N, delta=0, seed=1)
            ps.history[ps._slot(1)] = states
            ps.weights = w.copy()
            resample(ps, gen, scheme=scheme)
            draws[i] = h(ps.states).mean()
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - target) < 3 * se


class TestStep:
    def test_no_statistic_until_lag_passed(self):
        ps, gen = fresh_system(delta=4)
        model_y = np.zeros(10)
        for t in range(1, 11):
            ps, stat = step(ps, model_y[t - 1], THETA, gen)
            assert ps.t == t
            if t <= 4:
                assert stat is None
            else:
                assert stat is not None and stat.shape == (1,)

    def test_single_particle_weight_stays_one(self):
        ps, gen = fresh_system(N=1, delta=2)
        for t in range(1, 51):
            ps, _ = step(ps, 0.3 * t, THETA, gen)
            assert ps.weights == pytest.approx([1.0], abs=0.0)

    def test_weights_normalized_every_step(self):
        ps, gen = fresh_system(N=256, delta=3)
        rng = np.random.default_rng(5)
        for y in rng.normal(0.0, 6.0, 100):
            ps, _ = step(ps, y, THETA, gen)
            assert abs(ps.weights.sum() - 1.0) <= 1e-12

    def test_lag_zero_statistic_is_filtering_expectation(self):
        ps, gen = fresh_system(N=100, delta=0, resample_frac=0.0)
        rng = np.random.default_rng(6)
        for y in rng.normal(0.0, 5.0, 30):
            ps, stat = step(ps, y, THETA, gen)
            same_path = float((ps.weights @ MODEL.collect_stats(y, ps.states, None))[0])
            assert stat[0] == same_path
            direct = float(ps.weights @ (y - ps.states) ** 2)
            assert stat[0] == pytest.approx(direct, rel=1e-13)

    def test_statistic_uses_lagged_pair_and_observation(self):
        # drive a pair-statistic model and rebuild the statistic by hand
        model = make_model("full_ar")
        theta = {"a": 0.9, "sigma_w": 1.0, "sigma_v": 2.0}
        gen = derive_stream(8, 0).generator()
        delta = 3
        ps = init_particles(model, theta, 50, delta, gen, resample_frac=0.0)
        ys = np.random.default_rng(7).normal(0.0, 2.0, 12)
        for t in range(1, 13):
            ps, stat = step(ps, ys[t - 1], theta, gen)
            if stat is not None:
                k = t - delta
                x_k = ps.history[ps._slot(k)]
                x_k1 = ps.history[ps._slot(k + 1)]
                want = ps.weights @ model.collect_stats(ys[k - 1], x_k, x_k1)
                assert stat == pytest.approx(want, rel=1e-12)

    def test_resampling_triggered_by_low_ess(self):
        ps, gen = fresh_system(N=200, delta=2)
        rng = np.random.default_rng(8)
        for y in rng.normal(0.0, 6.0, 60):
            ps, _ = step(ps, y, {"sigma_v2": 0.05}, gen)  # sharp emission
        assert ps.n_resamples > 0

    def test_huge_outlier_survives_via_log_space(self):
        # emission densities underflow to zero for every particle, but the
        # max-subtracted log weights stay usable
        ps, gen = fresh_system(N=16, delta=2)
        ps, _ = step(ps, 1e6, {"sigma_v2": 1e-9}, gen)
        assert abs(ps.weights.sum() - 1.0) <= 1e-12

    def test_degenerate_weights_reported_with_time(self):
        # an observation so large the squared residual overflows makes every
        # log density -inf; that is unrecoverable and must name the step
        ps, gen = fresh_system(N=16, delta=2)
        ps, _ = step(ps, 0.5, THETA, gen)
        with pytest.raises(DegenerateWeightsError) as exc:
            for _ in range(10):
                ps, _ = step(ps, 1e200, THETA, gen)
        assert exc.value.t == 2

    def test_history_window_depth(self):
        ps, gen = fresh_system(N=8, delta=5)
        assert ps.history.shape == (6, 8)
        for t in range(1, 30):
            ps, _ = step(ps, 0.0, THETA, gen)
        assert ps.history.shape == (6, 8)  # never grows past lag + 1 states
