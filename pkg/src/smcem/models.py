"""Benchmark state-space models: samplers, densities, statistic collectors,
statistic-to-parameter maps, and data simulators.

Each model fixes a set of parameter names, a per-step statistic vector, and
the map `lambda_param` from running statistic averages to a parameter value.
Statistic collectors are evaluated at the lagged anchor k = t - lag using the
observation y_k, the state x_k, and (for models whose statistics involve
consecutive states) x_{k+1}; both states sit inside the lag window, so the
filter needs no storage beyond each particle's recent history.

Degenerate statistic values are handled here: variance arguments are floored
at 1e-12 before square roots, and ratio denominators at or below 1e-12 make
`lambda_param` return the previous estimate with a degeneracy flag.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, Params, RngStream

_EPS = 1e-12
_LOG2PI = math.log(2.0 * math.pi)


def _ar1_path(a, sigma_w, T, gen):
    """Stationary AR(1) path of length T."""
    x = np.empty(T)
    x[0] = gen.standard_normal() * sigma_w / math.sqrt(1.0 - a * a)
    noise = gen.standard_normal(T - 1) * sigma_w if T > 1 else ()
    for t in range(1, T):
        x[t] = a * x[t - 1] + noise[t - 1]
    return x


class Model(abc.ABC):
    """Interface the filter, schedulers, and harness program against."""

    name: str
    param_names: tuple
    n_stats: int
    stat_deps: dict       # parameter name -> indices of statistics feeding it
    needs_pair: bool      # statistics read (x_k, x_{k+1}) rather than x_k alone

    @abc.abstractmethod
    def validate_theta(self, theta: Params) -> None:
        """Reject parameter values for which the model is ill-posed."""

    @abc.abstractmethod
    def init_sample(self, theta, n, gen) -> np.ndarray:
        """n draws from the stationary initial distribution."""

    @abc.abstractmethod
    def transition_sample(self, x, theta, gen) -> np.ndarray:
        """One transition draw per particle."""

    @abc.abstractmethod
    def emission_logpdf(self, y, x, theta) -> np.ndarray:
        """log g(y | x) per particle."""

    @abc.abstractmethod
    def collect_stats(self, y, x, x_next) -> np.ndarray:
        """Per-particle statistic contributions, shape (n, n_stats)."""

    @abc.abstractmethod
    def lambda_param(self, name, s_hat, prev):
        """Map a statistic average to one parameter; returns (value, flag)
        where flag marks a degenerate input resolved by falling back."""

    @abc.abstractmethod
    def simulate(self, theta, T, stream: RngStream):
        """Latent path and observations of length T under theta."""

    def lambda_map(self, s_hat, prev: Params | None = None) -> Params:
        out = {}
        for name in self.param_names:
            prev_val = prev[name] if prev is not None else 0.0
            out[name], _ = self.lambda_param(name, s_hat, prev_val)
        return out

    # Multi-chain hooks; single-chain models are their own only component.

    def filter_components(self):
        return (self,)

    def component_theta(self, theta, i) -> Params:
        return theta

    def component_obs(self, y_t, i):
        return y_t

    def assemble_stats(self, parts) -> np.ndarray:
        return parts[0]


@dataclass(frozen=True)
class SimplifiedAR(Model):
    """Noisily observed AR(1) with known dynamics and unknown observation
    variance. The single statistic (y - x)^2 is itself the parameter estimate,
    so the statistic map is the identity (nonnegative because the statistic is
    a square)."""

    a: float = 0.95
    sigma_w: float = 1.0

    name = "simplified_ar"
    param_names = ("sigma_v2",)
    n_stats = 1
    stat_deps = {"sigma_v2": (0,)}
    needs_pair = False

    def validate_theta(self, theta):
        _require_names(self, theta)
        if abs(self.a) >= 1.0:
            raise ConfigError(f"|a| must be < 1 for a stationary chain, got {self.a}")
        if theta["sigma_v2"] <= 0.0:
            raise ConfigError("sigma_v2 must be > 0")

    def init_sample(self, theta, n, gen):
        sd = self.sigma_w / math.sqrt(1.0 - self.a * self.a)
        return gen.standard_normal(n) * sd

    def transition_sample(self, x, theta, gen):
        return self.a * x + self.sigma_w * gen.standard_normal(x.shape[0])

    def emission_logpdf(self, y, x, theta):
        v = theta["sigma_v2"]
        d = y - x
        return -0.5 * (_LOG2PI + math.log(v) + d * d / v)

    def collect_stats(self, y, x, x_next):
        d = y - x
        return (d * d)[:, None]

    def lambda_param(self, name, s_hat, prev):
        return float(s_hat[0]), False

    def simulate(self, theta, T, stream):
        self.validate_theta(theta)
        gen = stream.generator()
        x = _ar1_path(self.a, self.sigma_w, T, gen)
        y = x + math.sqrt(theta["sigma_v2"]) * gen.standard_normal(T)
        return x, y


@dataclass(frozen=True)
class FullAR(Model):
    """Noisily observed AR(1), all three parameters unknown.

    Statistics at anchor k: x_k^2, x_k x_{k+1}, x_{k+1}^2, (y_k - x_k)^2.
    """

    name = "full_ar"
    param_names = ("a", "sigma_w", "sigma_v")
    n_stats = 4
    stat_deps = {"a": (0, 1), "sigma_w": (0, 1, 2), "sigma_v": (3,)}
    needs_pair = True

    def validate_theta(self, theta):
        _require_names(self, theta)
        if abs(theta["a"]) >= 1.0:
            raise ConfigError(f"|a| must be < 1 for a stationary chain, got {theta['a']}")
        if theta["sigma_w"] <= 0.0:
            raise ConfigError("sigma_w must be > 0")
        if theta["sigma_v"] <= 0.0:
            raise ConfigError("sigma_v must be > 0")

    def init_sample(self, theta, n, gen):
        sd = theta["sigma_w"] / math.sqrt(1.0 - theta["a"] ** 2)
        return gen.standard_normal(n) * sd

    def transition_sample(self, x, theta, gen):
        return theta["a"] * x + theta["sigma_w"] * gen.standard_normal(x.shape[0])

    def emission_logpdf(self, y, x, theta):
        sv = theta["sigma_v"]
        d = (y - x) / sv
        return -0.5 * (_LOG2PI + d * d) - math.log(sv)

    def collect_stats(self, y, x, x_next):
        d = y - x
        return np.stack([x * x, x * x_next, x_next * x_next, d * d], axis=1)

    def lambda_param(self, name, s_hat, prev):
        if name == "a":
            if s_hat[0] <= _EPS:
                return float(prev), True
            return float(s_hat[1] / s_hat[0]), False
        if name == "sigma_w":
            if s_hat[0] <= _EPS:
                return float(prev), True
            return math.sqrt(max(s_hat[2] - s_hat[1] ** 2 / s_hat[0], _EPS)), False
        if name == "sigma_v":
            return math.sqrt(max(s_hat[3], _EPS)), False
        raise KeyError(name)

    def simulate(self, theta, T, stream):
        self.validate_theta(theta)
        gen = stream.generator()
        x = _ar1_path(theta["a"], theta["sigma_w"], T, gen)
        y = x + theta["sigma_v"] * gen.standard_normal(T)
        return x, y


@dataclass(frozen=True)
class TwoDimAR(Model):
    """Two uncoupled noisily observed AR(1) chains sharing the observation
    noise scale.

    Each chain is filtered independently (the joint posterior factorises), so
    chain machinery is exactly `FullAR`; the shared parameter is estimated
    from the per-step average of the two chains' squared residuals.
    Statistic layout: chain A's (x^2, x x', x'^2), chain B's, pooled residual.
    """

    name = "two_dim_ar"
    param_names = ("a_A", "sigma_w_A", "sigma_v", "a_B", "sigma_w_B")
    n_stats = 7
    stat_deps = {
        "a_A": (0, 1),
        "sigma_w_A": (0, 1, 2),
        "a_B": (3, 4),
        "sigma_w_B": (3, 4, 5),
        "sigma_v": (6,),
    }
    needs_pair = True
    _chains = ("A", "B")

    def validate_theta(self, theta):
        _require_names(self, theta)
        for chain in self._chains:
            if abs(theta[f"a_{chain}"]) >= 1.0:
                raise ConfigError(f"|a_{chain}| must be < 1, got {theta[f'a_{chain}']}")
            if theta[f"sigma_w_{chain}"] <= 0.0:
                raise ConfigError(f"sigma_w_{chain} must be > 0")
        if theta["sigma_v"] <= 0.0:
            raise ConfigError("sigma_v must be > 0")

    def filter_components(self):
        return (_FULL_AR, _FULL_AR)

    def component_theta(self, theta, i):
        chain = self._chains[i]
        return {
            "a": theta[f"a_{chain}"],
            "sigma_w": theta[f"sigma_w_{chain}"],
            "sigma_v": theta["sigma_v"],
        }

    def component_obs(self, y_t, i):
        return y_t[i]

    def assemble_stats(self, parts):
        pooled = 0.5 * (parts[0][3] + parts[1][3])
        return np.concatenate([parts[0][:3], parts[1][:3], [pooled]])

    def lambda_param(self, name, s_hat, prev):
        if name == "sigma_v":
            return _FULL_AR.lambda_param("sigma_v", [0.0, 0.0, 0.0, s_hat[6]], prev)
        base = 0 if name.endswith("A") else 3
        sub = [s_hat[base], s_hat[base + 1], s_hat[base + 2], 0.0]
        return _FULL_AR.lambda_param(name[:-2], sub, prev)

    # Filter-facing calls go to the per-chain components, never here.
    def init_sample(self, theta, n, gen):
        raise NotImplementedError("filter the per-chain components")

    def transition_sample(self, x, theta, gen):
        raise NotImplementedError("filter the per-chain components")

    def emission_logpdf(self, y, x, theta):
        raise NotImplementedError("filter the per-chain components")

    def collect_stats(self, y, x, x_next):
        raise NotImplementedError("filter the per-chain components")

    def simulate(self, theta, T, stream):
        self.validate_theta(theta)
        x = np.empty((T, 2))
        y = np.empty((T, 2))
        for i in range(2):
            sub = _FULL_AR.simulate(self.component_theta(theta, i), T, stream.child(i))
            x[:, i], y[:, i] = sub
        return x, y


@dataclass(frozen=True)
class StochasticVolatility(Model):
    """Log-volatility AR(1) with observations y ~ N(0, beta^2 e^x).

    Statistics at anchor k: x_k x_{k+1}, x_k^2, x_{k+1}^2, e^{-x_k} y_k^2.
    """

    name = "sv"
    param_names = ("phi", "sigma", "beta")
    n_stats = 4
    stat_deps = {"phi": (0, 1), "sigma": (0, 1, 2), "beta": (3,)}
    needs_pair = True

    def validate_theta(self, theta):
        _require_names(self, theta)
        if abs(theta["phi"]) >= 1.0:
            raise ConfigError(f"|phi| must be < 1, got {theta['phi']}")
        if theta["sigma"] <= 0.0:
            raise ConfigError("sigma must be > 0")
        if theta["beta"] <= 0.0:
            raise ConfigError("beta must be > 0")

    def init_sample(self, theta, n, gen):
        sd = theta["sigma"] / math.sqrt(1.0 - theta["phi"] ** 2)
        return gen.standard_normal(n) * sd

    def transition_sample(self, x, theta, gen):
        return theta["phi"] * x + theta["sigma"] * gen.standard_normal(x.shape[0])

    def emission_logpdf(self, y, x, theta):
        b2 = theta["beta"] ** 2
        return -0.5 * (_LOG2PI + math.log(b2) + x + y * y * np.exp(-x) / b2)

    def collect_stats(self, y, x, x_next):
        return np.stack([x * x_next, x * x, x_next * x_next, np.exp(-x) * y * y], axis=1)

    def lambda_param(self, name, s_hat, prev):
        if name == "phi":
            if s_hat[1] <= _EPS:
                return float(prev), True
            return float(s_hat[0] / s_hat[1]), False
        if name == "sigma":
            if s_hat[1] <= _EPS:
                return float(prev), True
            return math.sqrt(max(s_hat[2] - s_hat[0] ** 2 / s_hat[1], _EPS)), False
        if name == "beta":
            return math.sqrt(max(s_hat[3], _EPS)), False
        raise KeyError(name)

    def simulate(self, theta, T, stream):
        self.validate_theta(theta)
        gen = stream.generator()
        x = _ar1_path(theta["phi"], theta["sigma"], T, gen)
        y = theta["beta"] * np.exp(0.5 * x) * gen.standard_normal(T)
        return x, y


_FULL_AR = FullAR()


def _require_names(model, theta):
    expected = set(model.param_names)
    got = set(theta)
    if got != expected:
        raise ConfigError(
            f"model {model.name!r} expects parameters {sorted(expected)}, got {sorted(got)}"
        )


MODELS = {
    cls.name: cls for cls in (SimplifiedAR, FullAR, TwoDimAR, StochasticVolatility)
}


def make_model(name: str, known: dict | None = None) -> Model:
    """Instantiate a registered model; `known` overrides fixed constants
    (only the simplified AR model has any)."""
    if name not in MODELS:
        raise ConfigError(f"unknown model {name!r}; available: {sorted(MODELS)}")
    return MODELS[name](**(known or {}))
