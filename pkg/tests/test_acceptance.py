"""Acceptance suite: one test per gate criterion, each printing a PASS line
(visible with `pytest -s` or `-v`). Everything runs on synthetic data.
"""

import hashlib
import time
from pathlib import Path

import numpy as np
import pytest

from anomap.anomaly_map import invert, minmax_normalize, upsample_bilinear
from anomap.clustering import kmeans, lloyd_run
from anomap.foreground import morphological_close
from anomap.matching import select_support
from anomap.metrics import ScoredPixels, auprc, auroc
from anomap.pipeline import (
    PipelineConfig,
    run_ablation_k,
    run_ablation_strategy,
    run_detect,
    run_eval,
)
from anomap.rng import SplitMix64
from anomap.synth import SynthConfig, run_synth
from reference_impls import (
    ap_threshold_sweep,
    auroc_pairwise,
    close_translates,
    kmeans_exhaustive_optimum,
)


def report(line: str) -> None:
    print(f"\n{line}")


def random_scored_set(rng, n_max=500):
    n = int(rng.integers(10, n_max + 1))
    scores = rng.random(n)
    tie_fraction = rng.uniform(0.1, 0.5)
    tie_count = int(n * tie_fraction)
    if tie_count:
        # deliberate ties: copy values between random positions
        src = rng.integers(0, n, size=tie_count)
        dst = rng.integers(0, n, size=tie_count)
        scores[dst] = scores[src]
    labels = (rng.random(n) < rng.uniform(0.2, 0.8)).astype(int)
    if labels.sum() == 0:
        labels[0] = 1
    if labels.sum() == n:
        labels[0] = 0
    return scores, labels


def test_P1_kmeans_matches_exhaustive_optimum():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    for trial in range(50):
        n = int(rng.integers(4, 9))
        d = int(rng.integers(1, 4))
        spread = 0.5
        separation = float(rng.uniform(4.0, 8.0)) * spread
        half = n // 2
        pts = rng.normal(scale=spread, size=(n, d))
        pts[half:] += separation
        got = kmeans(pts, k=2, seed=trial, restarts=10).objective
        best = kmeans_exhaustive_optimum(pts, 2)
        assert abs(got - best) <= 1e-6 * max(best, 1e-12) + 1e-12, (trial, got, best)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.2f}s"
    report(f"P1 PASS: 50/50 exhaustive-enumeration optima matched in {elapsed:.2f}s")


def test_P2_lloyd_objective_monotone():
    rng = np.random.default_rng(202)
    checked = 0
    for trial in range(100):
        n = int(rng.integers(5, 201))
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, 5))
        k = min(k, n)
        pts = rng.normal(size=(n, d))
        for restart in range(10):
            run = lloyd_run(pts, k, SplitMix64(trial + restart))
            hist = run.objective_history
            for prev, cur in zip(hist, hist[1:]):
                assert cur <= prev * (1 + 1e-9) + 1e-12, (trial, restart, prev, cur)
                checked += 1
    report(f"P2 PASS: objective non-increasing across {checked} iteration steps")


def test_P3_auroc_matches_pairwise_oracle():
    rng = np.random.default_rng(303)
    for trial in range(100):
        scores, labels = random_scored_set(rng)
        got = auroc(ScoredPixels(scores, labels))
        want = auroc_pairwise(scores.tolist(), labels.tolist())
        assert abs(got - want) <= 1e-9, (trial, got, want)
    report("P3 PASS: 100/100 sort-based AUROC values match the pairwise oracle")


def test_P4_auprc_matches_threshold_sweep_oracle():
    rng = np.random.default_rng(303)  # same sets as P3
    for trial in range(100):
        scores, labels = random_scored_set(rng)
        got = auprc(ScoredPixels(scores, labels))
        want = ap_threshold_sweep(scores, labels)
        assert abs(got - want) <= 1e-9, (trial, got, want)
    constant = ScoredPixels(np.full(40, 0.3), np.r_[np.ones(10), np.zeros(30)])
    assert auprc(constant) == 10 / 40
    report("P4 PASS: 100/100 AUPRC values match the sweep oracle; constant = prevalence")


@pytest.fixture(scope="module")
def synth_benchmark(tmp_path_factory):
    root = tmp_path_factory.mktemp("accept") / "synth"
    run_synth(SynthConfig(
        out_root=root, seed=0, n_normals=20, n_queries=10,
        grid_hp=16, grid_wp=16, dim=32, anomaly_rect=(6, 8, 4, 4),
    ))
    return root


@pytest.fixture(scope="module")
def hetero_benchmark(tmp_path_factory):
    root = tmp_path_factory.mktemp("accept") / "hetero"
    run_synth(SynthConfig(
        out_root=root, seed=1, n_normals=20, n_queries=10,
        grid_hp=16, grid_wp=16, dim=32, anomaly_rect=(6, 8, 4, 4), modes=2,
    ))
    return root


def test_P5_synthetic_end_to_end(synth_benchmark, tmp_path):
    config = PipelineConfig(
        dataset_root=synth_benchmark, output_dir=tmp_path / "run", workers=1
    )
    start = time.perf_counter()
    report_detect = run_detect(config)
    rows = run_eval(config)
    elapsed = time.perf_counter() - start
    assert not report_detect.failures
    assert rows[0].auroc >= 0.99, rows[0]
    assert elapsed < 5.0, f"took {elapsed:.2f}s"
    report(
        f"P5 PASS: pooled pixel AUROC {100 * rows[0].auroc:.2f} >= 99.00, "
        f"detect+eval in {elapsed:.2f}s single-threaded"
    )


def test_P6_esm_finds_exact_copy():
    rng = np.random.default_rng(606)
    for trial in range(20):
        d = int(rng.integers(4, 64))
        pool_size = int(rng.integers(2, 40))
        pool = [(f"p{i:02d}", rng.normal(size=d)) for i in range(pool_size)]
        query = rng.normal(size=d)
        insert_at = int(rng.integers(0, pool_size))
        pool[insert_at] = ("copy", query.copy())
        sel = select_support(query, pool)
        assert sel.support_id == "copy", trial
        assert abs(sel.similarity - 1.0) <= 1e-6
    report("P6 PASS: exact pool copy selected with similarity 1.0 +/- 1e-6, 20/20 pools")


def test_P7_ablation_directions(hetero_benchmark, tmp_path):
    config = PipelineConfig(dataset_root=hetero_benchmark, output_dir=tmp_path / "strat")
    strat_rows = run_ablation_strategy(config, n_random_seeds=20)
    by_strategy = {r.strategy: r for r in strat_rows}
    assert by_strategy["esm"].auroc > by_strategy["random"].auroc

    config_k = PipelineConfig(dataset_root=hetero_benchmark, output_dir=tmp_path / "k")
    k_rows = run_ablation_k(config_k, [1, 2])
    by_k = {r.k: r for r in k_rows}
    assert by_k[2].auroc >= by_k[1].auroc
    report(
        "P7 PASS: AUROC esm {:.2f} > random(mean of 20 seeds) {:.2f}; "
        "k=2 {:.2f} >= k=1 {:.2f}".format(
            100 * by_strategy["esm"].auroc, 100 * by_strategy["random"].auroc,
            100 * by_k[2].auroc, 100 * by_k[1].auroc,
        )
    )


def _maps_digest(out_dir: Path) -> str:
    h = hashlib.sha256()
    for p in sorted((out_dir / "maps").glob("*.dadf")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def test_P8_determinism_and_cache_transparency(synth_benchmark, tmp_path):
    digests = {}
    variants = {
        "run1": {},
        "run2": {},
        "nocache": {"cache_centroids": False},
        "workers8": {"workers": 8},
    }
    for name, overrides in variants.items():
        config = PipelineConfig(
            dataset_root=synth_benchmark, output_dir=tmp_path / name, **overrides
        )
        run_detect(config)
        digests[name] = _maps_digest(tmp_path / name)
    assert len(set(digests.values())) == 1, digests
    report("P8 PASS: identical map bytes across rerun, cache off, and 8 workers")


def test_P9_morphology_matches_set_theoretic_reference():
    rng = np.random.default_rng(909)
    for trial in range(200):
        mask = rng.random((32, 32)) > rng.uniform(0.3, 0.7)
        radius = int(rng.integers(1, 4))
        got = morphological_close(mask, radius)
        want = close_translates(mask, radius)
        assert np.array_equal(got, want), (trial, radius)
        assert np.array_equal(morphological_close(got, radius), got), (trial, radius)
    report("P9 PASS: 200/200 closings equal the dilate-then-erode reference; idempotent")


def test_P10_range_and_normalization_invariants():
    rng = np.random.default_rng(1010)
    for trial in range(1000):
        hp = int(rng.integers(1, 9))
        wp = int(rng.integers(1, 9))
        if trial % 7 == 0:
            grid = np.full((hp, wp), float(rng.uniform(-1, 1)))
        else:
            grid = rng.uniform(-1, 1, size=(hp, wp))
        anomaly = invert(minmax_normalize(grid))
        assert anomaly.min() >= 0.0 and anomaly.max() <= 1.0
        if grid.max() - grid.min() < 1e-12:
            assert np.all(anomaly == 0.0), trial
        else:
            assert anomaly.max() == 1.0 and anomaly.min() == 0.0, trial
        out_h = int(rng.integers(1, 33))
        out_w = int(rng.integers(1, 33))
        pixel = upsample_bilinear(anomaly, out_h, out_w)
        assert pixel.min() >= anomaly.min() - 0.0
        assert pixel.max() <= anomaly.max() + 0.0
        assert pixel.min() >= 0.0 and pixel.max() <= 1.0
    report("P10 PASS: 1000/1000 grids satisfy range, endpoint, and extrema invariants")
