#!/usr/bin/env python3
"""Publication-scale sweeps: every preset at its default T=100k with 100
replicates. This is hours of compute; prefer run_desk_benchmarks.py unless
you need the full-scale boxplots."""

import argparse
import time

from smcem.experiment import load_presets, run_experiment

PRESETS = ("fig1", "fig2", "fig3", "sv", "sup5")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results/full")
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    for preset in PRESETS:
        configs = load_presets(preset, seed=args.seed)
        out_dir = f"{args.out}/{preset}"
        start = time.time()
        run_experiment(configs, out_dir=out_dir, workers=args.workers)
        print(f"{preset} -> {out_dir} ({time.time() - start:.0f}s)")


if __name__ == "__main__":
    main()
