"""Command-line entry point.

    smcem run --preset fig1 --T 20000 --replicates 20 --out results/fig1
    smcem run --config experiment.cfg --seed 7
    smcem run --model full_ar --method oem --c 0.9 --true a=0.95 ... --out dir

Flags override config-file keys; preset overrides apply to every config in
the sweep.
"""

from __future__ import annotations

import argparse
import sys

from .core import ConfigError
from .experiment import ExperimentConfig, load_presets, parse_config_file, run_experiment


def _parse_theta(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"expected NAME=VALUE, got {pair!r}")
        name, value = pair.split("=", 1)
        out[name.strip()] = float(value)
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="smcem")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment or preset sweep")
    run.add_argument("--preset", help="named preset (fig1, fig2, fig3, sv, sup1..sup6)")
    run.add_argument("--config", help="key=value config file")
    run.add_argument("--model")
    run.add_argument("--method", choices=("bem", "oem", "avg", "ioem"))
    run.add_argument("--N", type=int)
    run.add_argument("--T", type=int)
    run.add_argument("--delta", type=int)
    run.add_argument("--replicates", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--stride", type=int)
    run.add_argument("--out")
    run.add_argument("--resampler", choices=("systematic", "multinomial"))
    run.add_argument("--b", type=int)
    run.add_argument("--c", type=float)
    run.add_argument("--t0", type=int)
    run.add_argument("--cap-c", dest="cap_c", type=float)
    run.add_argument("--true", action="append", metavar="NAME=VALUE",
                     help="true parameter (repeatable)")
    run.add_argument("--init", action="append", metavar="NAME=VALUE",
                     help="initial parameter estimate (repeatable)")
    run.add_argument("--methods", help="comma-separated preset labels to keep")
    run.add_argument("--workers", type=int, default=1)
    return parser


_SCALAR_FLAGS = ("model", "method", "N", "T", "delta", "replicates", "seed",
                 "stride", "resampler", "b", "c", "t0", "cap_c", "out")


def _configs_from_args(args):
    flag_values = {k: getattr(args, k) for k in _SCALAR_FLAGS if getattr(args, k) is not None}
    if args.preset and args.config:
        raise ConfigError("--preset and --config are mutually exclusive")
    if args.preset:
        overrides = {k: v for k, v in flag_values.items() if k not in ("model", "method", "b", "c", "t0", "cap_c")}
        if args.methods:
            overrides["methods"] = args.methods
        return load_presets(args.preset, **overrides)
    kwargs = parse_config_file(args.config) if args.config else {"theta_true": {}, "theta0": {}}
    kwargs.update(flag_values)
    kwargs["theta_true"].update(_parse_theta(args.true))
    kwargs["theta0"].update(_parse_theta(args.init))
    if "model" not in kwargs or "method" not in kwargs:
        raise ConfigError("a run needs --preset, or a model and method "
                          "(via --config or --model/--method)")
    if not kwargs["theta_true"] or not kwargs["theta0"]:
        raise ConfigError("true and initial parameters are required "
                          "(true.<name>= / --true, init.<name>= / --init)")
    return [ExperimentConfig(**kwargs)]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        configs = _configs_from_args(args)
        out_dir = args.out if args.out else configs[0].out
        trace_rows, final_rows, statuses = run_experiment(
            configs, out_dir=out_dir, workers=args.workers
        )
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    failed = sum(1 for s in statuses.values() if s != "ok")
    print(f"wrote {len(trace_rows)} trace rows, {len(final_rows)} final rows to {out_dir}"
          + (f" ({failed} replicate(s) failed)" if failed else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
