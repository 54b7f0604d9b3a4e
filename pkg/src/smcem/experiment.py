"""Experiment harness: configuration, replicate orchestration, CSV output.

A run is described by one or more `ExperimentConfig`s (a preset expands to a
method sweep over the same model and data). For replicate r, data are
simulated with stream (seed, 2r) and the filter-plus-scheduler consumes
stream (seed, 2r+1), so every replicate's draws are independent of worker
scheduling and of the other methods in the sweep; all methods in a sweep see
identical data per replicate. Output is deterministic for a given config set,
regardless of the worker count.

Files written: trace.csv (rows every `stride` steps plus the final step),
final.csv (rows at t = T only), and manifest.txt (key=value description of
every config, a hash over that description, library versions, and the
per-replicate completion status).
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import ConfigError, derive_stream
from .em import DEFAULT_CAP_EXPONENT, make_scheduler
from .models import make_model
from .smc import DegenerateWeightsError, init_particles, step

CSV_HEADER = ("model", "method", "replicate", "t", "parameter", "estimate", "gamma")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    method: str
    theta_true: dict
    theta0: dict
    N: int = 100
    T: int = 100_000
    delta: int = 20
    replicates: int = 100
    seed: int = 42
    stride: int = 100
    resampler: str = "systematic"
    b: int | None = None
    c: float | None = None
    t0: int | None = None
    cap_c: float = DEFAULT_CAP_EXPONENT
    known: dict = field(default_factory=dict)
    frozen: tuple = ()
    out: str = "results"

    @property
    def label(self) -> str:
        if self.method == "bem":
            return f"bem_b{self.b}"
        if self.method == "oem":
            return f"oem_c{self.c:g}"
        if self.method == "avg":
            t0 = self.t0 if self.t0 is not None else max(1, (self.T - self.delta) // 2)
            return f"avg_c{(0.6 if self.c is None else self.c):g}_t0{t0}"
        return "ioem"

    def validate(self) -> None:
        model = make_model(self.model, self.known)
        model.validate_theta(self.theta_true)
        model.validate_theta(self.theta0)
        if self.T <= self.delta:
            raise ConfigError(f"T must exceed the lag, got T={self.T}, delta={self.delta}")
        if self.N < 1 or self.replicates < 1 or self.stride < 1:
            raise ConfigError("N, replicates and stride must all be >= 1")
        if self.resampler not in ("systematic", "multinomial"):
            raise ConfigError(f"unknown resampler {self.resampler!r}")
        if self.method == "bem" and (self.b is None or self.b < 1):
            raise ConfigError("bem needs a batch size b >= 1")
        if self.method in ("oem", "avg"):
            c = 0.6 if (self.method == "avg" and self.c is None) else self.c
            if c is None or not 0.5 < c <= 1.0:
                raise ConfigError(f"{self.method} needs c in (0.5, 1], got {c}")
        if self.method == "ioem" and not 0.5 < self.cap_c <= 1.0:
            raise ConfigError(f"ioem needs cap_c in (0.5, 1], got {self.cap_c}")
        if self.method not in ("bem", "oem", "avg", "ioem"):
            raise ConfigError(f"unknown method {self.method!r}")

    def manifest_items(self):
        items = [
            ("model", self.model),
            ("method", self.method),
            ("label", self.label),
        ]
        items += [(f"true.{k}", repr(v)) for k, v in sorted(self.theta_true.items())]
        items += [(f"init.{k}", repr(v)) for k, v in sorted(self.theta0.items())]
        items += [(f"known.{k}", repr(v)) for k, v in sorted(self.known.items())]
        items += [
            ("N", self.N), ("T", self.T), ("delta", self.delta),
            ("replicates", self.replicates), ("seed", self.seed),
            ("stride", self.stride), ("resampler", self.resampler),
        ]
        for name in ("b", "c", "t0"):
            value = getattr(self, name)
            if value is not None:
                items.append((name, value))
        if self.method == "ioem":
            items.append(("cap_c", self.cap_c))
        if self.frozen:
            items.append(("frozen", ",".join(self.frozen)))
        return items


def _build_scheduler(cfg, model):
    return make_scheduler(
        cfg.method, model, dict(cfg.theta0),
        b=cfg.b, c=cfg.c, t0=cfg.t0, cap_c=cfg.cap_c,
        horizon=cfg.T - cfg.delta, frozen=cfg.frozen,
    )


def filter_stream(model, Y, theta0, scheduler, filt_stream, N, delta,
                  resampler="systematic"):
    """Drive the filter and scheduler over observations Y, yielding
    (t, theta_hat, gammas) each step; gammas is None until the first
    statistic arrives and for methods without a reported weight.

    Component i of the model consumes sub-stream child(i).
    """
    comps = model.filter_components()
    gens = [filt_stream.child(i).generator() for i in range(len(comps))]
    systems = [
        init_particles(comp, model.component_theta(theta0, i), N, delta,
                       gens[i], scheme=resampler)
        for i, comp in enumerate(comps)
    ]
    theta = dict(theta0)
    gammas = None
    for t in range(1, len(Y) + 1):
        y_t = Y[t - 1]
        parts = []
        for i, ps in enumerate(systems):
            _, part = step(ps, model.component_obs(y_t, i),
                           model.component_theta(theta, i), gens[i])
            parts.append(part)
        if parts[0] is not None:
            stat = model.assemble_stats(parts)
            theta, gammas = scheduler.update(stat)
        yield t, theta, gammas


def replicate_stream(cfg: ExperimentConfig, replicate: int):
    """Simulate one replicate's data and yield its estimate trajectory."""
    model = make_model(cfg.model, cfg.known)
    _, Y = model.simulate(cfg.theta_true, cfg.T, derive_stream(cfg.seed, 2 * replicate))
    scheduler = _build_scheduler(cfg, model)
    yield from filter_stream(
        model, Y, dict(cfg.theta0), scheduler,
        derive_stream(cfg.seed, 2 * replicate + 1),
        cfg.N, cfg.delta, resampler=cfg.resampler,
    )


def _format_row(cfg, replicate, t, name, value, gamma):
    return (
        cfg.model, cfg.label, str(replicate), str(t), name,
        repr(float(value)), "" if gamma is None else repr(float(gamma)),
    )


def run_replicate(cfg: ExperimentConfig, replicate: int):
    """Rows for one replicate: (trace_rows, status). A degenerate-weights
    failure discards the replicate's rows and reports the failure time."""
    model = make_model(cfg.model, cfg.known)
    names = model.param_names
    rows = []
    try:
        for t, theta, gammas in replicate_stream(cfg, replicate):
            if t % cfg.stride == 0 or t == cfg.T:
                for name in names:
                    g = None if gammas is None else gammas.get(name)
                    rows.append(_format_row(cfg, replicate, t, name, theta[name], g))
    except DegenerateWeightsError as err:
        return [], f"failed:degenerate_weights@t={err.t}"
    return rows, "ok"


def _job(args):
    idx, cfg, replicate = args
    rows, status = run_replicate(cfg, replicate)
    return idx, replicate, rows, status


def _as_config_list(configs):
    if isinstance(configs, ExperimentConfig):
        return [configs]
    return list(configs)


def run_experiment(configs, out_dir=None, workers=1):
    """Run every (config, replicate) job and write trace.csv, final.csv and
    manifest.txt under `out_dir` (defaults to the first config's `out`).

    Returns (trace_rows, final_rows, statuses) with rows ordered by
    (config index, replicate, t, parameter); output is byte-identical for a
    given config list whatever the worker count.
    """
    configs = _as_config_list(configs)
    if not configs:
        raise ConfigError("no experiment configurations given")
    for cfg in configs:
        cfg.validate()
    out = Path(out_dir if out_dir is not None else configs[0].out)

    jobs = [(i, cfg, r) for i, cfg in enumerate(configs) for r in range(cfg.replicates)]
    results = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, rep, rows, status in pool.map(_job, jobs, chunksize=1):
                results[(idx, rep)] = (rows, status)
    else:
        for job in jobs:
            idx, rep, rows, status = _job(job)
            results[(idx, rep)] = (rows, status)

    trace_rows = []
    final_rows = []
    statuses = {}
    for i, cfg in enumerate(configs):
        final_t = str(cfg.T)
        for r in range(cfg.replicates):
            rows, status = results[(i, r)]
            trace_rows.extend(rows)
            final_rows.extend(row for row in rows if row[3] == final_t)
            statuses[(i, r)] = status

    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "trace.csv", trace_rows)
    _write_csv(out / "final.csv", final_rows)
    (out / "manifest.txt").write_text(_manifest_text(configs, statuses), encoding="utf-8")
    return trace_rows, final_rows, statuses


def _write_csv(path, rows):
    with io.StringIO() as buf:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)
        Path(path).write_text(buf.getvalue(), encoding="utf-8")


_PRESET_BASES = {
    "fig1": dict(
        model="simplified_ar",
        theta_true={"sigma_v2": 30.0},
        theta0={"sigma_v2": 20.0},
    ),
    "fig2": dict(
        model="full_ar",
        theta_true={"a": 0.95, "sigma_w": 1.0, "sigma_v": 5.5},
        theta0={"a": 0.8, "sigma_w": 3.0, "sigma_v": 1.0},
    ),
    "fig3": dict(
        model="two_dim_ar",
        theta_true={"a_A": 0.95, "sigma_w_A": 1.0, "sigma_v": 5.5,
                    "a_B": 0.95, "sigma_w_B": 1.0},
        theta0={"a_A": 0.95, "sigma_w_A": 1.0, "sigma_v": 3.0,
                "a_B": 0.95, "sigma_w_B": 3.0},
    ),
    "sv": dict(
        model="sv",
        theta_true={"phi": 0.1, "sigma": math.sqrt(2.0), "beta": 1.0},
        theta0={"phi": 0.5, "sigma": 1.0, "beta": math.sqrt(2.0)},
    ),
}

# Supplementary figures reuse the main experiment configurations; the last two
# add a shorter-threshold averaging variant.
_PRESET_ALIASES = {
    "sup1": ("fig2", False),
    "sup2": ("sv", False),
    "sup3": ("fig3", False),
    "sup4": ("fig3", False),
    "sup5": ("fig3", True),
    "sup6": ("fig3", True),
}

BEM_BATCH_SIZES = (100, 1000, 10000)
OEM_EXPONENTS = (0.6, 0.75, 0.9)


def load_presets(name, **overrides):
    """Expand a named preset into its method-sweep config list.

    Overrides (N, T, delta, replicates, seed, stride, resampler, out) apply to
    every config; averaging thresholds are derived from the final T. A
    `methods` override keeps only configs whose label is listed.
    """
    extra_avg = False
    if name in _PRESET_ALIASES:
        name, extra_avg = _PRESET_ALIASES[name]
    if name not in _PRESET_BASES:
        known = sorted(_PRESET_BASES) + sorted(_PRESET_ALIASES)
        raise ConfigError(f"unknown preset {name!r}; available: {known}")

    methods_filter = overrides.pop("methods", None)
    base = dict(_PRESET_BASES[name])
    base.update(overrides)
    horizon = base.get("T", 100_000) - base.get("delta", 20)

    configs = []
    for b in BEM_BATCH_SIZES:
        configs.append(ExperimentConfig(method="bem", b=b, **base))
    for c in OEM_EXPONENTS:
        configs.append(ExperimentConfig(method="oem", c=c, **base))
    configs.append(ExperimentConfig(method="avg", c=0.6, t0=max(1, horizon // 2), **base))
    if extra_avg:
        configs.append(ExperimentConfig(method="avg", c=0.6, t0=max(1, horizon // 10), **base))
    configs.append(ExperimentConfig(method="ioem", **base))

    if methods_filter is not None:
        wanted = set(methods_filter.split(",")) if isinstance(methods_filter, str) else set(methods_filter)
        available = [cfg.label for cfg in configs]
        configs = [cfg for cfg in configs if cfg.label in wanted]
        if not configs:
            raise ConfigError(f"no preset method matches {sorted(wanted)}; available: {available}")
    return configs


_CONFIG_KEYS = {
    "model": str, "method": str, "N": int, "T": int, "delta": int,
    "replicates": int, "seed": int, "stride": int, "resampler": str,
    "b": int, "c": float, "t0": int, "cap_c": float, "out": str,
}


def parse_config_file(path):
    """Flat key=value file -> keyword dict for ExperimentConfig.

    Plain keys mirror the config fields; parameter values use `true.<name>`,
    `init.<name>`, and `known.<name>` prefixes. '#' starts a comment.
    """
    kwargs = {"theta_true": {}, "theta0": {}, "known": {}}
    prefix_target = {"true": "theta_true", "init": "theta0", "known": "known"}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if "." in key:
            prefix, pname = key.split(".", 1)
            if prefix not in prefix_target:
                raise ConfigError(f"{path}:{lineno}: unknown key prefix {prefix!r}")
            kwargs[prefix_target[prefix]][pname] = float(value)
        elif key in _CONFIG_KEYS:
            kwargs[key] = _CONFIG_KEYS[key](value)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
    return kwargs


def _manifest_text(configs, statuses):
    lines = [
        f"smcem_version={__version__}",
        f"numpy_version={np.__version__}",
        f"python_version={sys.version_info.major}.{sys.version_info.minor}.{sys.version_info.micro}",
        f"configs={len(configs)}",
    ]
    cfg_lines = []
    for i, cfg in enumerate(configs):
        for key, value in cfg.manifest_items():
            cfg_lines.append(f"cfg{i}.{key}={value}")
    digest = hashlib.sha256("\n".join(cfg_lines).encode()).hexdigest()
    lines.append(f"config_hash={digest}")
    lines.extend(cfg_lines)
    for i, cfg in enumerate(configs):
        for r in range(cfg.replicates):
            lines.append(f"cfg{i}.status.rep{r}={statuses[(i, r)]}")
    return "\n".join(lines) + "\n"
