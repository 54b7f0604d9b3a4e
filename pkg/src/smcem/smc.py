"""Sequential importance resampling with fixed-lag statistic collection.

The filter keeps, per particle, only the last ``lag + 1`` states in a ring
buffer. At each step particles are propagated from the previous estimate,
reweighted by the emission density in log space (with max subtraction, so
outliers degrade gracefully), and, once enough history exists, the lagged
statistic vector is collected under the current weights *before* the
ESS-triggered resampling check. Parameter updates happen outside this module:
`step` hands the statistic vector to the caller and consumes whatever
estimate the caller feeds back on the next step.

Time accounting: `init_particles` draws the first state, so the system sits
at t = 1 with uniform weights; the first `step` call supplies the first
observation and reweights that initial sample without propagating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError


class DegenerateWeightsError(RuntimeError):
    """Every particle's emission density underflowed to zero."""

    def __init__(self, t):
        super().__init__(f"all particle weights underflowed at time {t}")
        self.t = t


@dataclass
class ParticleSystem:
    model: object
    N: int
    delta: int
    history: np.ndarray          # ring buffer, shape (delta + 1, N)
    weights: np.ndarray          # normalized; log-space only inside `step`
    obs: list                    # ring buffer of the last delta + 1 observations
    t: int = 1                   # index of the newest sampled state
    n_obs: int = 0               # observations absorbed so far
    scheme: str = "systematic"
    resample_frac: float = 0.5   # resample when ESS < resample_frac * N
    n_resamples: int = 0

    def _slot(self, time_index):
        return time_index % (self.delta + 1)

    @property
    def states(self) -> np.ndarray:
        """Current states x_t."""
        return self.history[self._slot(self.t)]


def init_particles(model, theta0, N, delta, gen, scheme="systematic",
                   resample_frac=0.5) -> ParticleSystem:
    """Draw N particles from the initial distribution with uniform weights."""
    if N < 1:
        raise ConfigError(f"need at least one particle, got N={N}")
    if delta < 0:
        raise ConfigError(f"lag must be >= 0, got {delta}")
    if model.needs_pair and delta == 0:
        raise ConfigError(
            f"model {model.name!r} collects consecutive-state statistics and "
            "needs lag >= 1"
        )
    if scheme not in ("systematic", "multinomial"):
        raise ConfigError(f"unknown resampling scheme {scheme!r}")
    model.validate_theta(theta0)
    x = model.init_sample(theta0, N, gen)
    history = np.empty((delta + 1,) + x.shape)
    ps = ParticleSystem(
        model=model,
        N=N,
        delta=delta,
        history=history,
        weights=np.full(N, 1.0 / N),
        obs=[None] * (delta + 1),
        scheme=scheme,
        resample_frac=resample_frac,
    )
    history[ps._slot(1)] = x
    return ps


def ess(weights) -> float:
    """Effective sample size 1 / sum w_i^2 of a normalized weight vector."""
    w = np.asarray(weights)
    return 1.0 / float(np.dot(w, w))


def _systematic_indices(w, gen):
    n = len(w)
    cs = np.cumsum(w)
    cs[-1] = 1.0
    positions = (gen.random() + np.arange(n)) / n
    return np.searchsorted(cs, positions, side="right")


def _multinomial_indices(w, gen):
    n = len(w)
    cs = np.cumsum(w)
    cs[-1] = 1.0
    return np.searchsorted(cs, gen.random(n), side="right")


def resample(ps: ParticleSystem, gen, scheme=None) -> ParticleSystem:
    """Redraw particles with expected multiplicity N * w_i, copying each
    survivor's whole history window; weights reset to uniform."""
    scheme = ps.scheme if scheme is None else scheme
    w = ps.weights
    if scheme == "systematic":
        idx = _systematic_indices(w, gen)
    elif scheme == "multinomial":
        idx = _multinomial_indices(w, gen)
    else:
        raise ConfigError(f"unknown resampling scheme {scheme!r}")
    ps.history = ps.history[:, idx]
    ps.weights = np.full(ps.N, 1.0 / ps.N)
    ps.n_resamples += 1
    return ps


def step(ps: ParticleSystem, y_t, theta, gen):
    """Advance the filter by one observation.

    Returns ``(ps, stat)`` where stat is the weighted lagged statistic vector,
    or None while t <= lag. Raises DegenerateWeightsError when no particle
    retains positive weight.
    """
    if ps.n_obs > 0:
        x = ps.model.transition_sample(ps.states, theta, gen)
        ps.t += 1
        ps.history[ps._slot(ps.t)] = x
    else:
        x = ps.states  # the initial sample absorbs the first observation

    # overflow inside the log density (extreme outliers) lands at -inf,
    # which the degeneracy check below turns into a diagnosable error
    with np.errstate(divide="ignore", over="ignore"):
        logw = np.log(ps.weights) + ps.model.emission_logpdf(y_t, x, theta)
    m = np.max(logw)
    if not np.isfinite(m):
        raise DegenerateWeightsError(ps.t)
    w = np.exp(logw - m)
    w /= w.sum()
    ps.weights = w
    ps.obs[ps._slot(ps.t)] = y_t
    ps.n_obs += 1

    stat = None
    if ps.t > ps.delta:
        k = ps.t - ps.delta
        y_k = ps.obs[ps._slot(k)]
        x_k = ps.history[ps._slot(k)]
        x_k1 = ps.history[ps._slot(k + 1)] if ps.model.needs_pair else None
        stat = w @ ps.model.collect_stats(y_k, x_k, x_k1)

    if ess(w) < ps.resample_frac * ps.N:
        resample(ps, gen)
    return ps, stat
