"""K-means over foreground patch features.

Lloyd iterations with k-means++ initialization. Every random draw comes
from a splitmix64 stream, restart r uses the stream seeded with seed+r, and
all ties break toward the smallest index, so a (points, k, seed) triple
yields a bit-identical result on every run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import SplitMix64


@dataclass
class CentroidSet:
    centroids: np.ndarray  # (k, D) float64
    assignments: np.ndarray  # (N,) int64, values in [0, k)
    objective: float  # sum of squared point-to-centroid distances
    iterations_run: int
    k: int


@dataclass
class LloydRun:
    """One restart: final state plus the per-iteration objective trace."""

    centroids: np.ndarray
    assignments: np.ndarray
    objective: float
    iterations_run: int
    objective_history: list[float]


def _as_points(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ValidationError(f"points must be a non-empty NxD matrix, got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points contain NaN or Inf")
    return pts


def assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid index per point; exact ties go to the smallest k."""
    pts = _as_points(points)
    cents = np.asarray(centroids, dtype=np.float64)
    if cents.ndim != 2 or cents.shape[1] != pts.shape[1]:
        raise ValidationError(f"centroid shape {cents.shape} incompatible with points")
    dists = np.empty((pts.shape[0], cents.shape[0]))
    for j in range(cents.shape[0]):
        diff = pts - cents[j]
        dists[:, j] = np.einsum("nd,nd->n", diff, diff)
    return dists.argmin(axis=1)


def _objective(points, centroids, assignments) -> float:
    diff = points - centroids[assignments]
    return float(np.einsum("nd,nd->", diff, diff))


def _means_with_repair(points, assignments, k):
    """Cluster means; an empty cluster steals the point farthest from its
    current centroid (only from donors that keep at least one member).

    Returns (means, assignments) with assignments reflecting any steals.
    """
    n, d = points.shape
    assignments = np.asarray(assignments, dtype=np.int64).copy()
    if assignments.shape != (n,) or (n and (assignments.min() < 0 or assignments.max() >= k)):
        raise ValidationError("assignments out of range")

    counts = np.bincount(assignments, minlength=k)
    sums = np.zeros((k, d))
    np.add.at(sums, assignments, points)

    for empty in np.flatnonzero(counts == 0):
        means = np.zeros((k, d))
        np.divide(sums, counts[:, None], out=means, where=counts[:, None] > 0)
        donor_ok = counts[assignments] >= 2
        if not donor_ok.any():
            raise ValidationError("cannot repair empty cluster: k exceeds points")
        dist = np.einsum(
            "nd,nd->n", points - means[assignments], points - means[assignments]
        )
        dist[~donor_ok] = -np.inf
        mover = int(dist.argmax())
        donor = assignments[mover]
        counts[donor] -= 1
        sums[donor] -= points[mover]
        counts[empty] = 1
        sums[empty] = points[mover]
        assignments[mover] = empty

    means = sums / counts[:, None]
    return means, assignments


def update_centroids(points: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    """Mean of each cluster's points, with empty clusters repaired."""
    pts = _as_points(points)
    means, _ = _means_with_repair(pts, assignments, k)
    return means


def _kmeans_pp_init(points: np.ndarray, k: int, rng: SplitMix64) -> np.ndarray:
    n = points.shape[0]
    chosen = [rng.next_index(n)]
    diff = points - points[chosen[0]]
    d2 = np.einsum("nd,nd->n", diff, diff)
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = rng.next_index(n)
        else:
            r = rng.next_float() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        chosen.append(idx)
        diff = points - points[idx]
        d2 = np.minimum(d2, np.einsum("nd,nd->n", diff, diff))
    return points[chosen].copy()


def lloyd_run(
    points: np.ndarray,
    k: int,
    rng: SplitMix64,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> LloydRun:
    """One k-means++-initialized Lloyd run, iterated until the largest
    centroid displacement falls below tol or max_iter is reached."""
    pts = _as_points(points)
    centroids = _kmeans_pp_init(pts, k, rng)
    history: list[float] = []
    assignments = np.zeros(pts.shape[0], dtype=np.int64)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        labels = assign(pts, centroids)
        new_centroids, assignments = _means_with_repair(pts, labels, k)
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        history.append(_objective(pts, centroids, assignments))
        if shift < tol:
            break
    return LloydRun(centroids, assignments, history[-1], iterations, history)


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    max_iter: int = 100,
    tol: float = 1e-6,
    restarts: int = 10,
) -> CentroidSet:
    """Best of `restarts` independent Lloyd runs by final objective.

    Restart r draws from the splitmix64 stream seeded with seed+r; objective
    ties keep the lowest restart index.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > n:
        raise ValidationError(f"k={k} exceeds number of points ({n})")
    if max_iter < 1 or restarts < 1:
        raise ValidationError("max_iter and restarts must be >= 1")

    best: LloydRun | None = None
    for r in range(restarts):
        run = lloyd_run(pts, k, SplitMix64(seed + r), max_iter=max_iter, tol=tol)
        if best is None or run.objective < best.objective:
            best = run
    return CentroidSet(
        centroids=best.centroids,
        assignments=best.assignments,
        objective=best.objective,
        iterations_run=best.iterations_run,
        k=k,
    )
