"""Pixel-level AUROC and AUPRC over pooled anomaly scores.

Both metrics are computed from one sort with tied scores handled as blocks,
so they agree exactly with their O(P*N) pairwise / threshold-sweep
definitions (which the test suite re-implements as oracles).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError, ValidationError


@dataclass
class ScoredPixels:
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64).ravel()
        self.labels = np.asarray(self.labels).ravel().astype(np.int64)
        if self.scores.shape != self.labels.shape:
            raise ValidationError(
                f"scores ({self.scores.shape}) and labels ({self.labels.shape}) differ"
            )
        if self.scores.size == 0:
            raise ValidationError("no pixels to score")
        if not np.all(np.isfinite(self.scores)):
            raise ValidationError("scores contain NaN or Inf")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ValidationError("labels must be binary")


def _tie_averaged_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks, averaging within tie groups."""
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    new_group = np.r_[True, s[1:] != s[:-1]]
    group = np.cumsum(new_group) - 1
    counts = np.bincount(group)
    starts = np.r_[0, np.cumsum(counts)[:-1]]
    avg_rank = starts + (counts - 1) / 2.0 + 1.0
    ranks = np.empty_like(scores)
    ranks[order] = avg_rank[group]
    return ranks


def auroc(sp: ScoredPixels) -> float:
    """Mann-Whitney AUROC: P(random positive outranks random negative),
    ties counted half."""
    p = int(sp.labels.sum())
    n = sp.labels.size - p
    if p < 1 or n < 1:
        raise UndefinedMetricError("AUROC needs at least one positive and one negative")
    ranks = _tie_averaged_ranks(sp.scores)
    pos_rank_sum = ranks[sp.labels == 1].sum()
    return float((pos_rank_sum - p * (p + 1) / 2.0) / (p * n))


def auprc(sp: ScoredPixels) -> float:
    """Non-interpolated average precision, tied scores as single blocks."""
    p = int(sp.labels.sum())
    if p < 1:
        raise UndefinedMetricError("AUPRC needs at least one positive")
    order = np.argsort(-sp.scores, kind="mergesort")
    s = sp.scores[order]
    y = sp.labels[order]
    block_end = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(y)[block_end]
    fp = np.cumsum(1 - y)[block_end]
    recall = tp / p
    precision = tp / (tp + fp)
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def pool_pixels(maps: list[np.ndarray], masks: list[np.ndarray]) -> ScoredPixels:
    """Concatenate all pixels of all (map, mask) pairs into one score list."""
    if not maps or len(maps) != len(masks):
        raise ValidationError("need equally many non-empty maps and masks")
    scores = []
    labels = []
    for i, (amap, mask) in enumerate(zip(maps, masks)):
        amap = np.asarray(amap)
        mask = np.asarray(mask)
        if amap.shape != mask.shape:
            raise ValidationError(
                f"pair {i}: map shape {amap.shape} != mask shape {mask.shape}"
            )
        scores.append(amap.ravel().astype(np.float64))
        labels.append((mask.ravel() > 0).astype(np.int64))
    return ScoredPixels(np.concatenate(scores), np.concatenate(labels))
