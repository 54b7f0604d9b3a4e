import math

import numpy as np
import pytest

from smcem import ConfigError, derive_stream, make_model
from smcem.models import MODELS, FullAR, SimplifiedAR, StochasticVolatility, TwoDimAR

STREAM = derive_stream(2024, 0)


class TestSimulate:
    def test_zero_observation_noise_reproduces_latent_path(self):
        model = make_model("full_ar")
        x, y = model.simulate({"a": 0.5, "sigma_w": 1.0, "sigma_v": 1e-300}, 200, STREAM)
        assert np.allclose(x, y, atol=1e-12)

    def test_iid_latent_variance(self):
        model = make_model("full_ar")
        x, _ = model.simulate({"a": 0.0, "sigma_w": 1.0, "sigma_v": 1.0}, 100_000, STREAM)
        se = math.sqrt(2.0 / (len(x) - 1))
        assert abs(x.var(ddof=1) - 1.0) < 3 * se

    def test_stationary_variance_at_high_persistence(self):
        model = make_model("full_ar")
        x, _ = model.simulate({"a": 0.95, "sigma_w": 1.0, "sigma_v": 1.0}, 100_000, STREAM)
        target = 1.0 / (1.0 - 0.95**2)
        # AR(1) sample-variance standard error inflates by the correlation time
        se = target * math.sqrt(2.0 / len(x)) * math.sqrt((1 + 0.95**2) / (1 - 0.95**2))
        assert abs(x.var(ddof=1) - target) < 3 * se

    def test_explosive_parameters_rejected(self):
        model = make_model("full_ar")
        with pytest.raises(ConfigError):
            model.simulate({"a": 1.0, "sigma_w": 1.0, "sigma_v": 1.0}, 10, STREAM)
        with pytest.raises(ConfigError):
            make_model("sv").simulate({"phi": -1.2, "sigma": 1.0, "beta": 1.0}, 10, STREAM)

    def test_deterministic_given_stream(self):
        model = make_model("sv")
        theta = {"phi": 0.1, "sigma": math.sqrt(2), "beta": 1.0}
        x1, y1 = model.simulate(theta, 500, derive_stream(5, 2))
        x2, y2 = model.simulate(theta, 500, derive_stream(5, 2))
        assert np.array_equal(x1, x2) and np.array_equal(y1, y2)

    def test_two_dim_shares_chain_a_with_full_ar(self):
        two = make_model("two_dim_ar")
        theta = {"a_A": 0.9, "sigma_w_A": 1.0, "sigma_v": 2.0, "a_B": 0.5, "sigma_w_B": 3.0}
        x2, y2 = two.simulate(theta, 300, STREAM)
        xa, ya = make_model("full_ar").simulate(
            {"a": 0.9, "sigma_w": 1.0, "sigma_v": 2.0}, 300, STREAM.child(0)
        )
        assert np.array_equal(x2[:, 0], xa)
        assert np.array_equal(y2[:, 0], ya)


class TestLambdaMaps:
    def test_full_ar_substitution(self):
        got = make_model("full_ar").lambda_map(np.array([1.0, 0.95, 1.9025, 30.25]))
        assert got["a"] == pytest.approx(0.95)
        assert got["sigma_w"] == pytest.approx(1.0)
        assert got["sigma_v"] == pytest.approx(5.5)

    def test_zero_cross_moment(self):
        got = make_model("full_ar").lambda_map(np.array([2.0, 0.0, 9.0, 1.0]))
        assert got["a"] == 0.0
        assert got["sigma_w"] == pytest.approx(3.0)

    def test_sv_substitution(self):
        got = make_model("sv").lambda_map(np.array([0.1, 1.0, 2.01, 1.0]))
        assert got["phi"] == pytest.approx(0.1)
        assert got["sigma"] == pytest.approx(math.sqrt(2.0))
        assert got["beta"] == pytest.approx(1.0)

    def test_degenerate_denominator_returns_previous(self):
        model = make_model("full_ar")
        value, flag = model.lambda_param("a", np.array([0.0, 1.0, 1.0, 1.0]), 0.77)
        assert flag and value == 0.77
        value, flag = model.lambda_param("sigma_w", np.array([0.0, 1.0, 1.0, 1.0]), 2.2)
        assert flag and value == 2.2

    def test_variance_arguments_floored(self):
        model = make_model("full_ar")
        value, flag = model.lambda_param("sigma_w", np.array([1.0, 10.0, 1.0, 1.0]), 0.0)
        assert not flag and value == pytest.approx(1e-6)

    def test_nonnegative_scale_estimates(self):
        rng = np.random.default_rng(0)
        for model_name in ("full_ar", "sv", "two_dim_ar"):
            model = make_model(model_name)
            for _ in range(50):
                s = rng.normal(0.0, 5.0, model.n_stats)
                theta = model.lambda_map(s)
                for name, value in theta.items():
                    if name.startswith(("sigma", "beta")):
                        assert value >= 0.0

    def test_dependency_map_covers_every_parameter(self):
        for model_cls in MODELS.values():
            model = model_cls()
            assert set(model.stat_deps) == set(model.param_names)
            for deps in model.stat_deps.values():
                assert len(deps) >= 1
                assert all(0 <= j < model.n_stats for j in deps)


class TestCollectors:
    def test_full_ar_contributions(self):
        got = FullAR().collect_stats(1.0, np.array([2.0]), np.array([3.0]))
        assert got[0] == pytest.approx([4.0, 6.0, 9.0, 1.0])

    def test_sv_residual_statistic(self):
        sv = StochasticVolatility()
        assert sv.collect_stats(2.0, np.array([0.0]), np.array([0.0]))[0, 3] == pytest.approx(4.0)
        assert sv.collect_stats(2.0, np.array([math.log(4.0)]), np.array([0.0]))[0, 3] == pytest.approx(1.0)

    def test_simplified_residual(self):
        got = SimplifiedAR().collect_stats(3.0, np.array([1.0]), None)
        assert got[0, 0] == pytest.approx(4.0)

    def test_two_dim_pooling(self):
        two = TwoDimAR()
        a = np.array([1.0, 2.0, 3.0, 10.0])
        b = np.array([4.0, 5.0, 6.0, 20.0])
        merged = two.assemble_stats([a, b])
        assert merged == pytest.approx([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 15.0])


class TestLambdaConsistency:
    def test_full_ar_population_statistics_recover_truth(self):
        theta = {"a": 0.95, "sigma_w": 1.0, "sigma_v": 5.5}
        model = make_model("full_ar")
        x, y = model.simulate(theta, 100_000, derive_stream(77, 0))
        s = np.array([
            (x[:-1] ** 2).mean(),
            (x[:-1] * x[1:]).mean(),
            (x[1:] ** 2).mean(),
            ((y - x) ** 2).mean(),
        ])
        got = model.lambda_map(s)
        # three-sigma Monte Carlo bands measured by the statistic spreads
        assert got["a"] == pytest.approx(0.95, abs=0.01)
        assert got["sigma_w"] == pytest.approx(1.0, abs=0.02)
        assert got["sigma_v"] == pytest.approx(5.5, abs=0.05)


class TestEmissionNormalization:
    @pytest.mark.parametrize("name", ["simplified_ar", "full_ar", "sv"])
    def test_emission_density_integrates_to_one(self, name):
        model = make_model(name)
        rng = np.random.default_rng(1)
        for _ in range(10):
            if name == "simplified_ar":
                theta = {"sigma_v2": rng.uniform(0.5, 40.0)}
                sd = math.sqrt(theta["sigma_v2"])
            elif name == "full_ar":
                theta = {"a": rng.uniform(-0.9, 0.9), "sigma_w": rng.uniform(0.5, 2.0),
                         "sigma_v": rng.uniform(0.2, 6.0)}
                sd = theta["sigma_v"]
            else:
                theta = {"phi": rng.uniform(-0.9, 0.9), "sigma": rng.uniform(0.5, 2.0),
                         "beta": rng.uniform(0.5, 2.0)}
            x = np.array([rng.uniform(-3.0, 3.0)])
            if name == "sv":
                sd = theta["beta"] * math.exp(0.5 * x[0])
                center = 0.0
            else:
                center = x[0]
            grid = np.linspace(center - 10 * sd, center + 10 * sd, 4001)
            dens = np.array([math.exp(model.emission_logpdf(g, x, theta)[0]) for g in grid])
            assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-6)

    def test_two_dim_emission_integrates_to_one_per_chain(self):
        two = TwoDimAR()
        theta = {"a_A": 0.5, "sigma_w_A": 1.0, "sigma_v": 1.7, "a_B": 0.2, "sigma_w_B": 2.0}
        for i in range(2):
            comp = two.filter_components()[i]
            sub = two.component_theta(theta, i)
            x = np.array([0.4])
            grid = np.linspace(x[0] - 17.0, x[0] + 17.0, 4001)
            dens = np.array([math.exp(comp.emission_logpdf(g, x, sub)[0]) for g in grid])
            assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-6)


def test_unknown_model_rejected():
    with pytest.raises(ConfigError):
        make_model("bogus")


def test_wrong_parameter_names_rejected():
    with pytest.raises(ConfigError):
        make_model("full_ar").validate_theta({"a": 0.5, "sigma_w": 1.0})
