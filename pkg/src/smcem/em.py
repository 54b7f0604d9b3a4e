"""EM learning-rate schedulers.

All four schedulers consume the same per-step statistic vectors s_t and emit
parameter estimates; the surrounding filter never branches on the scheduler
type. `update` counts statistics, not raw time steps, so with a fixed lag the
first call corresponds to the first available lagged statistic and the first
online weight is exactly 1.

Schedulers:

* BatchEM(b)           -- estimates frozen within batches of b statistics,
                          refreshed from the batch mean at each boundary.
* OnlineEM(c)          -- exponentially forgetting average with gamma_n = n^-c.
* AveragedOEM(c, t0)   -- OnlineEM plus a running mean of its estimates from
                          statistic t0 onwards.
* IntrospectiveOEM(c)  -- per-parameter adaptive gamma: each parameter keeps a
                          private statistic average, forms pseudo-independent
                          updates, and regresses them (weighted by its own
                          gamma history) to propose the next gamma, clamped
                          between n^-1 and n^-c.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ConfigError
from .regression import RegressionState

DEFAULT_CAP_EXPONENT = 0.51
REGRESSION_WARMUP = 10  # points needed before the regression drives gamma


def telescoped_weights(gammas) -> np.ndarray:
    """Effective weight of each statistic inside the running average:
    eta_k = gamma_k * prod_{j>k} (1 - gamma_j)."""
    g = np.asarray(gammas, dtype=float)
    eta = np.empty_like(g)
    acc = 1.0
    for k in range(len(g) - 1, -1, -1):
        eta[k] = g[k] * acc
        acc *= 1.0 - g[k]
    return eta


def pseudo_update(theta_t: float, theta_prev: float, gamma_t: float) -> float:
    """Unsmooth successive estimates: (1/g) theta_t + (1 - 1/g) theta_prev.

    Chosen so that consecutive outputs are uncorrelated when the underlying
    statistic stream is; for an identity statistic-to-parameter map this
    recovers the raw statistic exactly.
    """
    if not 0.0 < gamma_t <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma_t}")
    inv = 1.0 / gamma_t
    return inv * theta_t + (1.0 - inv) * theta_prev


def cap_gamma(gamma_reg: float, t: int, c: float) -> float:
    """Clamp a proposed weight into [(t+1)^-1, (t+1)^-c]."""
    lower = 1.0 / (t + 1.0)
    upper = (t + 1.0) ** (-c)
    return min(upper, max(gamma_reg, lower))


def propose_gamma(reg: RegressionState, t: int, c: float) -> float:
    """Next weight from the regression diagnostics: (|b1| + sd_b1) / sd_b0,
    clamped; falls back to the upper cap when the fit is not identified or
    the intercept spread is zero."""
    est = reg.estimates()
    upper = (t + 1.0) ** (-c)
    if est is None:
        return upper
    _, b1, s0, s1 = est
    if s0 <= 0.0:
        return upper
    return cap_gamma((abs(b1) + s1) / s0, t, c)


class BatchEM:
    """Within a batch the estimate is held fixed; at the boundary the batch
    mean of the statistics is pushed through the model's statistic map."""

    def __init__(self, model, theta0, b, frozen=()):
        if b < 1:
            raise ValueError(f"batch size must be >= 1, got {b}")
        self.model = model
        self.b = int(b)
        self.frozen = frozenset(frozen)
        self.theta = dict(theta0)
        self._acc = np.zeros(model.n_stats)
        self._count = 0
        self.lambda_fallbacks = 0

    def update(self, stat):
        self._acc += stat
        self._count += 1
        if self._count == self.b:
            s_hat = self._acc / self.b
            self._apply_lambda(s_hat)
            self._acc[:] = 0.0
            self._count = 0
        return dict(self.theta), None

    def _apply_lambda(self, s_hat):
        for name in self.model.param_names:
            if name in self.frozen:
                continue
            value, degenerate = self.model.lambda_param(name, s_hat, self.theta[name])
            if degenerate:
                self.lambda_fallbacks += 1
            self.theta[name] = value


class OnlineEM:
    """Running statistic average with gamma_n = n^-c, c in (0.5, 1]."""

    def __init__(self, model, theta0, c, frozen=()):
        if not 0.5 < c <= 1.0:
            raise ValueError(f"exponent c must be in (0.5, 1], got {c}")
        self.model = model
        self.c = float(c)
        self.frozen = frozenset(frozen)
        self.theta = dict(theta0)
        self.s_hat = None
        self.n = 0
        self.lambda_fallbacks = 0

    def update(self, stat):
        self.n += 1
        gamma = self.n ** (-self.c)
        if self.s_hat is None:
            self.s_hat = np.array(stat, dtype=float)
        else:
            self.s_hat = gamma * np.asarray(stat, dtype=float) + (1.0 - gamma) * self.s_hat
        for name in self.model.param_names:
            if name in self.frozen:
                continue
            value, degenerate = self.model.lambda_param(name, self.s_hat, self.theta[name])
            if degenerate:
                self.lambda_fallbacks += 1
            self.theta[name] = value
        gammas = {name: gamma for name in self.model.param_names if name not in self.frozen}
        return dict(self.theta), gammas


class AveragedOEM:
    """OnlineEM whose estimate is replaced, from statistic t0 onwards, by the
    running mean of the inner estimates."""

    def __init__(self, model, theta0, c, t0, frozen=()):
        if t0 < 1:
            raise ValueError(f"averaging threshold must be >= 1, got {t0}")
        self.inner = OnlineEM(model, theta0, c, frozen=frozen)
        self.t0 = int(t0)
        self._sums = {name: 0.0 for name in model.param_names}
        self._count = 0

    @property
    def model(self):
        return self.inner.model

    @property
    def lambda_fallbacks(self):
        return self.inner.lambda_fallbacks

    def update(self, stat):
        theta, _ = self.inner.update(stat)
        if self.inner.n < self.t0:
            return theta, None
        self._count += 1
        out = {}
        for name, value in theta.items():
            self._sums[name] += value
            out[name] = self._sums[name] / self._count
        return out, None


class _ParamState:
    __slots__ = ("s_hat", "gamma", "theta_prev", "reg")

    def __init__(self, theta0):
        self.s_hat = None
        self.gamma = 1.0
        self.theta_prev = float(theta0)
        self.reg = RegressionState()


class IntrospectiveOEM:
    """Per-parameter adaptive weights.

    Every parameter keeps its own copy of the statistic average so that all
    statistics feeding one parameter share a single weight sequence. After
    each update the pseudo-independent value is pushed into that parameter's
    weighted regression, whose intercept/slope spread proposes the next
    weight. Until the regression has REGRESSION_WARMUP points the upper cap
    (n+1)^-c is used.
    """

    def __init__(self, model, theta0, cap_c=DEFAULT_CAP_EXPONENT, warmup=REGRESSION_WARMUP, frozen=()):
        if not 0.5 < cap_c <= 1.0:
            raise ValueError(f"cap exponent must be in (0.5, 1], got {cap_c}")
        self.model = model
        self.cap_c = float(cap_c)
        self.warmup = int(warmup)
        self.frozen = frozenset(frozen)
        self.theta = dict(theta0)
        self.active = [p for p in model.param_names if p not in self.frozen]
        self._state = {p: _ParamState(theta0[p]) for p in self.active}
        self.n = 0
        self.lambda_fallbacks = 0
        self.last_pseudo = {}

    def update(self, stat):
        self.n += 1
        stat = np.asarray(stat, dtype=float)
        gammas = {}
        for name in self.active:
            st = self._state[name]
            g = st.gamma
            if st.s_hat is None:
                st.s_hat = stat.copy()
            else:
                st.s_hat = g * stat + (1.0 - g) * st.s_hat
            value, degenerate = self.model.lambda_param(name, st.s_hat, st.theta_prev)
            if degenerate or not math.isfinite(value):
                if not math.isfinite(value):
                    value = st.theta_prev
                self.lambda_fallbacks += 1
            pseudo = pseudo_update(value, st.theta_prev, g)
            st.reg.update(pseudo, g)
            if st.reg.n < self.warmup:
                st.gamma = (self.n + 1.0) ** (-self.cap_c)
            else:
                st.gamma = propose_gamma(st.reg, self.n, self.cap_c)
            gammas[name] = g
            self.last_pseudo[name] = pseudo
            st.theta_prev = value
            self.theta[name] = value
        return dict(self.theta), gammas


def make_scheduler(method, model, theta0, *, b=None, c=None, t0=None,
                   cap_c=DEFAULT_CAP_EXPONENT, horizon=None, frozen=()):
    """Build a scheduler from its method tag and tuning parameters.

    `horizon` is the number of statistics the run will see; it supplies the
    default averaging threshold t0 = horizon // 2 for AveragedOEM.
    """
    if method == "bem":
        if b is None:
            raise ConfigError("method 'bem' requires a batch size b")
        return BatchEM(model, theta0, b, frozen=frozen)
    if method == "oem":
        if c is None:
            raise ConfigError("method 'oem' requires an exponent c")
        return OnlineEM(model, theta0, c, frozen=frozen)
    if method == "avg":
        c = 0.6 if c is None else c
        if t0 is None:
            if horizon is None:
                raise ConfigError("method 'avg' requires t0 or a run horizon")
            t0 = max(1, int(horizon) // 2)
        return AveragedOEM(model, theta0, c, t0, frozen=frozen)
    if method == "ioem":
        return IntrospectiveOEM(model, theta0, cap_c=cap_c, frozen=frozen)
    raise ConfigError(f"unknown EM method {method!r}; expected bem, oem, avg or ioem")
