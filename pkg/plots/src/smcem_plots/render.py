"""Render boxplot and trace-panel figures from experiment CSVs.

Input files follow the harness schema
``model,method,replicate,t,parameter,estimate,gamma`` (gamma may be empty).
Rendering is read-only and deterministic: identical input yields identical
output bytes (date metadata is stripped from vector formats).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "smcem-plots"  # reproducible SVG ids

import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = ("model", "method", "replicate", "t", "parameter", "estimate", "gamma")

# one fixed style per method slot, recycled in first-appearance order
_STYLES = [
    dict(color="tab:blue", linestyle="-"),
    dict(color="tab:red", linestyle="--"),
    dict(color="tab:green", linestyle="-."),
    dict(color="tab:purple", linestyle="-"),
    dict(color="tab:orange", linestyle=":"),
    dict(color="tab:brown", linestyle="--"),
    dict(color="tab:pink", linestyle="-."),
    dict(color="tab:gray", linestyle=":"),
]


class PlotError(RuntimeError):
    """Bad plot request: unreadable rows, missing columns, empty selection."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str
    kind: str                 # "boxplot" | "trace"
    parameter: str | None = None
    truth: float | None = None
    out_path: str = "figure.pdf"


def read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise PlotError(f"{path}: missing columns {missing} (header {header})")
            rows = list(reader)
    except OSError as err:
        raise PlotError(f"cannot read {path}: {err}") from err
    if not rows:
        raise PlotError(f"{path}: no data rows")
    return rows


def _ordered_unique(values):
    seen = {}
    for v in values:
        seen.setdefault(v, None)
    return list(seen)


def _select_parameter(rows, parameter):
    params = _ordered_unique(r["parameter"] for r in rows)
    if parameter is None:
        if len(params) > 1:
            raise PlotError(f"several parameters present {params}; pick one with --param")
        return params[0]
    if parameter not in params:
        raise PlotError(f"parameter {parameter!r} not in file (have {params})")
    return parameter


def build_figure(spec: PlotSpec):
    """Assemble the matplotlib figure for a spec (no file output)."""
    rows = read_rows(spec.csv_path)
    if spec.kind == "boxplot":
        return _boxplot_figure(rows, spec)
    if spec.kind == "trace":
        return _trace_figure(rows, spec)
    raise PlotError(f"unknown figure kind {spec.kind!r} (boxplot or trace)")


def _boxplot_figure(rows, spec):
    parameter = _select_parameter(rows, spec.parameter)
    methods = _ordered_unique(r["method"] for r in rows)
    groups = {m: [] for m in methods}
    for r in rows:
        if r["parameter"] == parameter:
            groups[r["method"]].append(float(r["estimate"]))
    methods = [m for m in methods if groups[m]]
    if not methods:
        raise PlotError(f"no estimates for parameter {parameter!r}")
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(methods), 4.0))
    ax.boxplot([groups[m] for m in methods], tick_labels=methods)
    if spec.truth is not None:
        ax.axhline(spec.truth, color="black", linewidth=1.0, linestyle="--")
    ax.set_ylabel(parameter)
    ax.set_title(f"{rows[0]['model']}: final estimates of {parameter}")
    ax.tick_params(axis="x", rotation=45)
    fig.tight_layout()
    return fig


def _median_series(rows, value_key):
    """t -> median over replicates, per method; rows pre-filtered."""
    per_method = {}
    for r in rows:
        value = r[value_key]
        if value == "":
            continue
        per_method.setdefault(r["method"], {}).setdefault(int(r["t"]), []).append(float(value))
    series = {}
    for method, by_t in per_method.items():
        ts = np.array(sorted(by_t))
        med = np.array([np.median(by_t[t]) for t in ts])
        series[method] = (ts, med)
    return series


def _trace_figure(rows, spec):
    if spec.parameter is not None:
        params = [_select_parameter(rows, spec.parameter)]
    else:
        params = _ordered_unique(r["parameter"] for r in rows)
    methods = _ordered_unique(r["method"] for r in rows)
    styles = {m: _STYLES[i % len(_STYLES)] for i, m in enumerate(methods)}
    ncol = len(params)
    fig, axes = plt.subplots(2, ncol, figsize=(3.0 * ncol, 5.5), squeeze=False)
    for j, param in enumerate(params):
        sub = [r for r in rows if r["parameter"] == param]
        top, bottom = axes[0][j], axes[1][j]
        for method, (ts, med) in _median_series(sub, "estimate").items():
            top.plot(ts, med, label=method, linewidth=1.0, **styles[method])
        for method, (ts, med) in _median_series(sub, "gamma").items():
            bottom.plot(ts, med, linewidth=1.0, **styles[method])
        top.set_title(param)
        bottom.set_yscale("log")
        bottom.set_xlabel("t")
        if j == 0:
            top.set_ylabel("estimate")
            bottom.set_ylabel("weight")
            top.legend(fontsize="x-small")
        if spec.truth is not None and len(params) == 1:
            top.axhline(spec.truth, color="black", linewidth=1.0, linestyle="--")
    fig.tight_layout()
    return fig


def render(spec: PlotSpec) -> str:
    """Write the figure to spec.out_path; returns the path."""
    fig = build_figure(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    suffix = out.suffix.lower()
    metadata = None
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    fig.savefig(out, metadata=metadata)
    plt.close(fig)
    return str(out)
