#!/usr/bin/env python3
"""Desk-scale benchmark sweeps: every preset at T=20k, 20 replicates.

Writes one results directory per preset under --out (default results/desk).
Roughly 15 minutes with --workers 4; see run_full_benchmarks.py for the
publication-scale settings.
"""

import argparse
import time

from smcem.experiment import load_presets, run_experiment

PRESETS = ("fig1", "fig2", "fig3", "sv")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="results/desk")
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--T", type=int, default=20_000)
    parser.add_argument("--replicates", type=int, default=20)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    for preset in PRESETS:
        configs = load_presets(preset, T=args.T, replicates=args.replicates, seed=args.seed)
        out_dir = f"{args.out}/{preset}"
        start = time.time()
        _, final_rows, statuses = run_experiment(configs, out_dir=out_dir, workers=args.workers)
        failed = sum(1 for s in statuses.values() if s != "ok")
        print(f"{preset}: {len(final_rows)} final rows -> {out_dir} "
              f"({time.time() - start:.0f}s, {failed} failed replicates)")


if __name__ == "__main__":
    main()
