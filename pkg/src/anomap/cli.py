"""Command-line entry point.

Subcommands: synth, detect, eval, ablate-k, ablate-strategy.
Exit codes: 0 success, 1 validation or configuration error, 2 partial
failure (some queries were skipped).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import AnomapError
from .pipeline import (
    PipelineConfig,
    rows_to_csv,
    run_ablation_k,
    run_ablation_strategy,
    run_detect,
    run_eval,
    write_metrics_csv,
)
from .synth import SynthConfig, run_synth


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, help="dataset root (holds manifest.json)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k", type=int, default=2, help="number of cluster centroids")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--closing-radius", type=int, default=2,
                   help="radius of the square closing element (pixels)")
    p.add_argument("--tau", type=float, default=0.5,
                   help="foreground fraction for a patch to count as foreground")
    p.add_argument("--strategy", choices=("esm", "random"), default="esm")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--per-image", action="store_true",
                   help="average per-image metrics instead of pooling pixels")
    p.add_argument("--kmeans-max-iter", type=int, default=100)
    p.add_argument("--kmeans-tol", type=float, default=1e-6)
    p.add_argument("--kmeans-restarts", type=int, default=10)
    p.add_argument("--heatmaps", action="store_true",
                   help="also write 8-bit PGM heatmaps next to the anomaly maps")
    p.add_argument("--no-cache", action="store_true",
                   help="disable the (support, k, seed) centroid cache")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        dataset_root=Path(args.dataset),
        output_dir=Path(args.out),
        k=args.k,
        seed=args.seed,
        closing_radius=args.closing_radius,
        tau=args.tau,
        strategy=args.strategy,
        kmeans_max_iter=args.kmeans_max_iter,
        kmeans_tol=args.kmeans_tol,
        kmeans_restarts=args.kmeans_restarts,
        pooling="per-image" if args.per_image else "pooled",
        workers=args.workers,
        write_heatmaps=args.heatmaps,
        cache_centroids=not args.no_cache,
    )


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        hp, wp = (int(v) for v in text.lower().split("x"))
        return hp, wp
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like 16x16, got {text!r}") from exc


def _parse_rect(text: str) -> tuple[int, int, int, int]:
    try:
        row, col, h, w = (int(v) for v in text.split(","))
        return row, col, h, w
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"rect must be row,col,h,w in patches, got {text!r}"
        ) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anomap",
        description="Training-free anomaly localization over pre-extracted "
                    "vision-transformer patch features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic planted-anomaly dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normals", type=int, default=20)
    p.add_argument("--queries", type=int, default=10)
    p.add_argument("--grid", type=_parse_grid, default=(16, 16), metavar="HPxWP")
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--rect", type=_parse_rect, default=(6, 8, 4, 4),
                   metavar="ROW,COL,H,W", help="planted anomaly rectangle in patches")
    p.add_argument("--patch-size", type=int, default=8)
    p.add_argument("--modes", type=int, default=1,
                   help="number of normal appearance modes (2 = heterogeneous pool)")

    p = sub.add_parser("detect", help="compute anomaly maps for all queries")
    _add_pipeline_flags(p)

    p = sub.add_parser("eval", help="score existing detect outputs")
    _add_pipeline_flags(p)

    p = sub.add_parser("ablate-k", help="sweep the number of cluster centroids")
    _add_pipeline_flags(p)
    p.add_argument("--k-values", default="1,2,3,4",
                   help="comma-separated cluster counts")

    p = sub.add_parser("ablate-strategy", help="random support baseline vs ESM")
    _add_pipeline_flags(p)
    p.add_argument("--random-seeds", type=int, default=20,
                   help="number of seeds to average for the random baseline")

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    try:
        if args.command == "synth":
            hp, wp = args.grid
            manifest = run_synth(SynthConfig(
                out_root=Path(args.out),
                seed=args.seed,
                n_normals=args.normals,
                n_queries=args.queries,
                grid_hp=hp,
                grid_wp=wp,
                dim=args.dim,
                anomaly_rect=args.rect,
                patch_size=args.patch_size,
                modes=args.modes,
            ))
            print(
                f"wrote {len(manifest.normal_entries)} normals, "
                f"{len(manifest.query_entries)} queries under {args.out}"
            )
            return 0

        config = _config_from_args(args)

        if args.command == "detect":
            report = run_detect(config)
            print(f"{len(report.results)} queries processed, "
                  f"{len(report.failures)} failed; run manifest: {report.run_manifest_path}")
            return 2 if report.failures else 0

        if args.command == "eval":
            rows = run_eval(config)
            path = write_metrics_csv(rows, Path(args.out) / "metrics.csv")
            print(rows_to_csv(rows), end="")
            print(f"metrics written to {path}")
            return 0

        if args.command == "ablate-k":
            k_values = [int(v) for v in str(args.k_values).split(",") if v.strip()]
            rows = run_ablation_k(config, k_values)
            print(rows_to_csv(rows), end="")
            return 0

        if args.command == "ablate-strategy":
            rows = run_ablation_strategy(config, n_random_seeds=args.random_seeds)
            print(rows_to_csv(rows), end="")
            return 0

        raise AssertionError(f"unhandled command {args.command}")
    except (AnomapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
