#!/usr/bin/env python3
"""Reproduce both ablation tables on the heterogeneous (two-mode) synthetic
benchmark: cluster-count sweep and random-vs-ESM support selection.

Usage: python scripts/run_ablations.py [workdir] [--random-seeds N]
"""

import argparse
import tempfile
from pathlib import Path

from anomap.pipeline import PipelineConfig, rows_to_csv, run_ablation_k, run_ablation_strategy
from anomap.synth import SynthConfig, run_synth


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("workdir", nargs="?", default=None)
    parser.add_argument("--random-seeds", type=int, default=20)
    args = parser.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="anomap_"))
    data = workdir / "hetero"
    run_synth(SynthConfig(out_root=data, seed=1, n_normals=20, n_queries=10, modes=2))

    k_rows = run_ablation_k(
        PipelineConfig(dataset_root=data, output_dir=workdir / "ablate_k"),
        [1, 2, 3, 4],
    )
    print("# cluster-count sweep")
    print(rows_to_csv(k_rows), end="")

    strat_rows = run_ablation_strategy(
        PipelineConfig(dataset_root=data, output_dir=workdir / "ablate_strategy"),
        n_random_seeds=args.random_seeds,
    )
    print("# support-selection strategies")
    print(rows_to_csv(strat_rows), end="")
    return 0


if __name__ == "__main__":
    main()
