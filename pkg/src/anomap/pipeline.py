"""End-to-end orchestration: support selection, foreground clustering,
anomaly-map computation, evaluation and the two ablation sweeps.

Queries are independent work units processed by a thread pool; all outputs
are keyed and ordered by query id, so byte-identical results are produced
regardless of worker count, scheduling, or centroid-cache state.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from threading import Lock

import numpy as np
from PIL import Image

from . import anomaly_map as amap
from .clustering import CentroidSet, kmeans
from .errors import UndefinedMetricError, ValidationError
from .foreground import binarize_nonzero, morphological_close, to_patch_mask
from .manifest import DatasetManifest, ManifestEntry, load_manifest
from .matching import select_support, select_support_random
from .metrics import ScoredPixels, auprc, auroc, pool_pixels
from .pgm import heatmap_to_pgm
from .rng import fnv1a64
from .tensor_io import read_tensor, write_tensor

log = logging.getLogger(__name__)

STRATEGIES = ("esm", "random")
POOLINGS = ("pooled", "per-image")


@dataclass
class PipelineConfig:
    dataset_root: Path
    output_dir: Path
    k: int = 2
    seed: int = 0
    closing_radius: int = 2
    tau: float = 0.5
    strategy: str = "esm"
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-6
    kmeans_restarts: int = 10
    pooling: str = "pooled"
    workers: int = 1
    write_heatmaps: bool = False
    cache_centroids: bool = True

    def validate(self) -> None:
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.tau <= 1.0:
            raise ValidationError(f"tau must be in (0, 1], got {self.tau}")
        if self.closing_radius < 0:
            raise ValidationError(f"closing radius must be >= 0, got {self.closing_radius}")
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"strategy must be one of {STRATEGIES}")
        if self.pooling not in POOLINGS:
            raise ValidationError(f"pooling must be one of {POOLINGS}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")


@dataclass
class QueryResult:
    query_id: str
    support_id: str
    support_similarity: float
    patch_map_path: Path
    pixel_map_path: Path
    heatmap_path: Path | None
    timings: dict[str, float] = field(default_factory=dict)


@dataclass
class DetectReport:
    results: list[QueryResult]
    failures: list[tuple[str, str]]
    run_manifest_path: Path


@dataclass
class EvalRow:
    dataset: str
    k: int
    strategy: str
    auroc: float
    auprc: float
    n_queries: int
    n_pixels: int


def _load_image(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img)


def _image_dims(path: Path) -> tuple[int, int]:
    with Image.open(path) as img:
        w, h = img.size
    return h, w


class _CentroidCache:
    """Concurrent (support_id, k, seed) -> CentroidSet map.

    kmeans is deterministic in that key, so first-writer-wins (and the
    occasional duplicate computation under a race) cannot change results.
    """

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self._store: dict[tuple[str, int, int], CentroidSet] = {}
        self._lock = Lock()

    def get(self, key):
        if not self.enabled:
            return None
        with self._lock:
            return self._store.get(key)

    def put(self, key, value) -> CentroidSet:
        if not self.enabled:
            return value
        with self._lock:
            return self._store.setdefault(key, value)


def support_patch_mask(
    entry: ManifestEntry, grid: tuple[int, int], patch_size: int,
    closing_radius: int, tau: float,
) -> np.ndarray:
    """Foreground patch mask for a support image, with the all-foreground
    fallback when the mask comes out empty (or no raster is available)."""
    hp, wp = grid
    if entry.image_path is None:
        log.warning("support %s has no image; treating all patches as foreground", entry.id)
        return np.ones((hp, wp), dtype=bool)
    pixel_mask = morphological_close(
        binarize_nonzero(_load_image(entry.image_path)), closing_radius
    )
    mask_hp, mask_wp = (
        pixel_mask.shape[0] // patch_size,
        pixel_mask.shape[1] // patch_size,
    )
    if (mask_hp, mask_wp) != (hp, wp):
        raise ValidationError(
            f"support {entry.id}: image implies {mask_hp}x{mask_wp} patch grid, "
            f"features are {hp}x{wp}"
        )
    patch_mask = to_patch_mask(pixel_mask, patch_size, tau)
    if not patch_mask.any():
        log.warning(
            "support %s: empty foreground mask; treating all patches as foreground",
            entry.id,
        )
        return np.ones((hp, wp), dtype=bool)
    return patch_mask


def _support_centroids(
    entry: ManifestEntry, config: PipelineConfig, patch_size: int,
    cache: _CentroidCache,
) -> CentroidSet:
    key = (entry.id, config.k, config.seed)
    hit = cache.get(key)
    if hit is not None:
        return hit
    feats = read_tensor(entry.patch_path)
    hp, wp, dim = feats.shape
    mask = support_patch_mask(
        entry, (hp, wp), patch_size, config.closing_radius, config.tau
    )
    points = feats[mask].reshape(-1, dim)
    k = config.k
    if k > points.shape[0]:
        log.warning(
            "support %s: only %d foreground patches, clamping k=%d",
            entry.id, points.shape[0], k,
        )
        k = points.shape[0]
    result = kmeans(
        points, k, config.seed,
        max_iter=config.kmeans_max_iter,
        tol=config.kmeans_tol,
        restarts=config.kmeans_restarts,
    )
    return cache.put(key, result)


def _query_seed(base_seed: int, query_id: str) -> int:
    # per-query stream for the random strategy: deterministic, independent
    # of processing order
    return (base_seed ^ fnv1a64(query_id)) & ((1 << 64) - 1)


def _process_query(
    query: ManifestEntry,
    manifest: DatasetManifest,
    pool: list[tuple[str, np.ndarray]],
    supports: dict[str, ManifestEntry],
    config: PipelineConfig,
    cache: _CentroidCache,
    maps_dir: Path,
) -> QueryResult:
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    embed = read_tensor(query.embed_path)
    if config.strategy == "esm":
        selection = select_support(embed, pool)
    else:
        selection = select_support_random(
            embed, pool, _query_seed(config.seed, query.id)
        )
    timings["select"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    support = supports[selection.support_id]
    centroids = _support_centroids(support, config, manifest.patch_size, cache)
    timings["cluster"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    feats = read_tensor(query.patch_path)
    hp, wp, _ = feats.shape
    if query.image_path is not None:
        out_h, out_w = _image_dims(query.image_path)
    else:
        out_h, out_w = hp * manifest.patch_size, wp * manifest.patch_size
    patch_map, pixel_map = amap.compute_anomaly_map(
        feats, centroids.centroids, out_h, out_w
    )
    timings["map"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    patch_path = maps_dir / f"{query.id}.patch.dadf"
    pixel_path = maps_dir / f"{query.id}.pixel.dadf"
    write_tensor(patch_map, patch_path)
    write_tensor(pixel_map, pixel_path)
    heatmap_path = None
    if config.write_heatmaps:
        heatmap_path = maps_dir / f"{query.id}.pgm"
        heatmap_to_pgm(pixel_map, heatmap_path)
    timings["write"] = time.perf_counter() - t0

    return QueryResult(
        query_id=query.id,
        support_id=selection.support_id,
        support_similarity=selection.similarity,
        patch_map_path=patch_path,
        pixel_map_path=pixel_path,
        heatmap_path=heatmap_path,
        timings=timings,
    )


def _write_run_manifest(
    path: Path, config: PipelineConfig,
    results: list[QueryResult], failures: list[tuple[str, str]],
) -> None:
    lines = ["[config]"]
    for key in (
        "dataset_root", "output_dir", "k", "seed", "closing_radius", "tau",
        "strategy", "kmeans_max_iter", "kmeans_tol", "kmeans_restarts",
        "pooling", "workers", "write_heatmaps", "cache_centroids",
    ):
        lines.append(f"{key} = {getattr(config, key)}")
    lines.append("")
    lines.append("[selections]")
    for r in results:
        lines.append(
            f"query {r.query_id} support {r.support_id} "
            f"similarity {r.support_similarity:.9f}"
        )
    if failures:
        lines.append("")
        lines.append("[failures]")
        for qid, message in failures:
            lines.append(f"query {qid} error {message}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def run_detect(config: PipelineConfig) -> DetectReport:
    """Produce anomaly maps for every query in the dataset.

    Per-query failures are recorded and skipped rather than aborting the
    run; the CLI turns a partial run into exit code 2.
    """
    config.validate()
    manifest = load_manifest(config.dataset_root)

    pool = [
        (entry.id, read_tensor(entry.embed_path))
        for entry in manifest.normal_entries
    ]
    supports = {entry.id: entry for entry in manifest.normal_entries}
    cache = _CentroidCache(config.cache_centroids)

    maps_dir = Path(config.output_dir) / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)

    def worker(query: ManifestEntry):
        try:
            return query.id, _process_query(
                query, manifest, pool, supports, config, cache, maps_dir
            ), None
        except Exception as exc:  # fail-soft: one bad query must not kill the run
            log.warning("query %s failed: %s", query.id, exc)
            return query.id, None, f"{type(exc).__name__}: {exc}"

    if config.workers == 1:
        outcomes = [worker(q) for q in manifest.query_entries]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            outcomes = list(executor.map(worker, manifest.query_entries))

    outcomes.sort(key=lambda item: item[0])
    results = [res for _, res, err in outcomes if err is None]
    failures = [(qid, err) for qid, _, err in outcomes if err is not None]

    run_manifest_path = Path(config.output_dir) / "run_manifest.txt"
    _write_run_manifest(run_manifest_path, config, results, failures)
    return DetectReport(results, failures, run_manifest_path)


def _load_binary_mask(path: Path) -> np.ndarray:
    return np.asarray(_load_image(path)) > 0


def _usable_eval_pairs(
    manifest: DatasetManifest, config: PipelineConfig
) -> list[tuple[str, np.ndarray, np.ndarray]]:
    maps_dir = Path(config.output_dir) / "maps"
    pairs = []
    for query in manifest.query_entries:
        if query.mask_path is None:
            log.warning("query %s has no ground-truth mask; excluded from eval", query.id)
            continue
        pixel_path = maps_dir / f"{query.id}.pixel.dadf"
        if not pixel_path.exists():
            log.warning("query %s has no anomaly map under %s; excluded", query.id, maps_dir)
            continue
        mask = _load_binary_mask(query.mask_path)
        if mask.ndim == 3:
            mask = mask.any(axis=2)
        pairs.append((query.id, read_tensor(pixel_path), mask))
    return pairs


def run_eval(config: PipelineConfig) -> list[EvalRow]:
    """Score existing detect outputs against ground-truth masks."""
    config.validate()
    manifest = load_manifest(config.dataset_root)
    pairs = _usable_eval_pairs(manifest, config)
    if not pairs:
        raise ValidationError("no usable queries: need masks and detect outputs")

    dataset = Path(config.dataset_root).name
    n_pixels = int(sum(m.size for _, m, _ in pairs))

    if config.pooling == "pooled":
        pooled = pool_pixels([m for _, m, _ in pairs], [g for _, _, g in pairs])
        row = EvalRow(
            dataset, config.k, config.strategy,
            auroc(pooled), auprc(pooled), len(pairs), n_pixels,
        )
        return [row]

    per_auroc = []
    per_auprc = []
    for qid, amap_pixels, mask in pairs:
        try:
            sp = ScoredPixels(amap_pixels.ravel(), mask.ravel())
            per_auroc.append(auroc(sp))
            per_auprc.append(auprc(sp))
        except UndefinedMetricError as exc:
            log.warning("query %s excluded from per-image metrics: %s", qid, exc)
    if not per_auroc:
        raise UndefinedMetricError("metrics undefined for every query")
    row = EvalRow(
        dataset, config.k, config.strategy,
        float(np.mean(per_auroc)), float(np.mean(per_auprc)),
        len(per_auroc), n_pixels,
    )
    return [row]


CSV_HEADER = "dataset,k,strategy,auroc,auprc,n_queries,n_pixels"


def rows_to_csv(rows: list[EvalRow]) -> str:
    """Metric rows as CSV text; AUROC/AUPRC as percentages, 2 decimals."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.dataset},{r.k},{r.strategy},"
            f"{100.0 * r.auroc:.2f},{100.0 * r.auprc:.2f},"
            f"{r.n_queries},{r.n_pixels}"
        )
    return "\n".join(lines) + "\n"


def write_metrics_csv(rows: list[EvalRow], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_csv(rows), encoding="utf-8")
    return path


def run_detect_eval(config: PipelineConfig) -> tuple[DetectReport, list[EvalRow]]:
    report = run_detect(config)
    rows = run_eval(config)
    return report, rows


def run_ablation_k(config: PipelineConfig, k_values: list[int]) -> list[EvalRow]:
    """Detect+eval once per cluster count; one metrics row per k."""
    deduped: list[int] = []
    for k in k_values:
        if k in deduped:
            log.warning("duplicate k=%d in ablation values; ignored", k)
        else:
            deduped.append(k)
    rows = []
    for k in deduped:
        sub = replace(
            config, k=k, output_dir=Path(config.output_dir) / f"k{k}"
        )
        _, k_rows = run_detect_eval(sub)
        rows.extend(k_rows)
    write_metrics_csv(rows, Path(config.output_dir) / "ablation_k.csv")
    return rows


def run_ablation_strategy(
    config: PipelineConfig, n_random_seeds: int = 20
) -> list[EvalRow]:
    """Random-support baseline (averaged over seeds) versus embedding
    similarity matching; two metrics rows, baseline first."""
    if n_random_seeds < 1:
        raise ValidationError("n_random_seeds must be >= 1")
    dataset = Path(config.dataset_root).name

    aurocs = []
    auprcs = []
    n_queries = 0
    n_pixels = 0
    for i in range(n_random_seeds):
        sub = replace(
            config, strategy="random", seed=config.seed + i,
            output_dir=Path(config.output_dir) / f"random_seed{i}",
        )
        _, rows = run_detect_eval(sub)
        aurocs.append(rows[0].auroc)
        auprcs.append(rows[0].auprc)
        n_queries = rows[0].n_queries
        n_pixels = rows[0].n_pixels
    random_row = EvalRow(
        dataset, config.k, "random",
        float(np.mean(aurocs)), float(np.mean(auprcs)), n_queries, n_pixels,
    )

    esm_sub = replace(
        config, strategy="esm", output_dir=Path(config.output_dir) / "esm"
    )
    _, esm_rows = run_detect_eval(esm_sub)

    rows = [random_row, esm_rows[0]]
    write_metrics_csv(rows, Path(config.output_dir) / "ablation_strategy.csv")
    return rows
