"""From query patch features to a pixel-level anomaly map: per-patch mean
cosine similarity against the support centroids, min-max normalization,
inversion, and bilinear upsampling to image resolution.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .matching import ZERO_NORM_EPS

MINMAX_EPS = 1e-12


def patch_similarity_map(features: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Mean cosine similarity of each patch feature to the centroid set.

    features: (hp, wp, D); centroids: (K, D). Zero-norm vectors contribute a
    cosine of 0, same convention as the support matcher. Returns (hp, wp)
    values in [-1, 1].
    """
    feats = np.asarray(features, dtype=np.float64)
    cents = np.asarray(centroids, dtype=np.float64)
    if feats.ndim != 3:
        raise ValidationError(f"features must be (hp, wp, D), got {feats.shape}")
    if cents.ndim != 2 or cents.shape[0] < 1:
        raise ValidationError(f"centroids must be (K, D), got {cents.shape}")
    if feats.shape[2] != cents.shape[1]:
        raise ValidationError(
            f"feature dim {feats.shape[2]} != centroid dim {cents.shape[1]}"
        )

    hp, wp, dim = feats.shape
    flat = feats.reshape(-1, dim)
    fnorm = np.linalg.norm(flat, axis=1, keepdims=True)
    funit = np.divide(flat, fnorm, out=np.zeros_like(flat), where=fnorm >= ZERO_NORM_EPS)
    cnorm = np.linalg.norm(cents, axis=1, keepdims=True)
    cunit = np.divide(cents, cnorm, out=np.zeros_like(cents), where=cnorm >= ZERO_NORM_EPS)

    sims = np.clip(np.einsum("nd,kd->nk", funit, cunit), -1.0, 1.0)
    return sims.mean(axis=1).reshape(hp, wp)


def minmax_normalize(grid: np.ndarray) -> np.ndarray:
    """Affine rescale to [0, 1]; a (near-)constant grid maps to all ones.

    Constant similarity to the normal prototypes carries no anomaly
    evidence, and all-ones here becomes all-zeros after inversion.
    """
    grid = np.asarray(grid, dtype=np.float64)
    lo = grid.min()
    hi = grid.max()
    if hi - lo < MINMAX_EPS:
        return np.ones_like(grid)
    return (grid - lo) / (hi - lo)


def invert(norm_grid: np.ndarray) -> np.ndarray:
    """1 - x: high similarity means low anomaly."""
    return 1.0 - np.asarray(norm_grid, dtype=np.float64)


def upsample_bilinear(patch_map: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with half-pixel centers and edge clamping.

    Source coordinate for output index i is (i + 0.5) * (src/dst) - 0.5,
    clamped to [0, src-1]. Output is clipped to the input extrema so the
    blend never escapes the source range by rounding.
    """
    src = np.asarray(patch_map, dtype=np.float64)
    if src.ndim != 2 or src.shape[0] < 1 or src.shape[1] < 1:
        raise ValidationError(f"patch map must be a non-empty 2-D grid, got {src.shape}")
    if out_h < 1 or out_w < 1:
        raise ValidationError(f"output dims must be >= 1, got {out_h}x{out_w}")
    sh, sw = src.shape

    def axis_coords(out_n: int, src_n: int):
        coords = (np.arange(out_n) + 0.5) * (src_n / out_n) - 0.5
        coords = np.clip(coords, 0.0, src_n - 1.0)
        lo = np.floor(coords).astype(np.int64)
        lo = np.minimum(lo, src_n - 2) if src_n > 1 else np.zeros_like(lo)
        frac = coords - lo
        return lo, frac

    y0, fy = axis_coords(out_h, sh)
    x0, fx = axis_coords(out_w, sw)
    y1 = np.minimum(y0 + 1, sh - 1)
    x1 = np.minimum(x0 + 1, sw - 1)

    top = src[np.ix_(y0, x0)] + fx[None, :] * (src[np.ix_(y0, x1)] - src[np.ix_(y0, x0)])
    bot = src[np.ix_(y1, x0)] + fx[None, :] * (src[np.ix_(y1, x1)] - src[np.ix_(y1, x0)])
    out = top + fy[:, None] * (bot - top)
    return np.clip(out, src.min(), src.max())


def compute_anomaly_map(
    features: np.ndarray, centroids: np.ndarray, out_h: int, out_w: int
) -> tuple[np.ndarray, np.ndarray]:
    """Full composition; returns (patch_map, pixel_map), both in [0, 1]."""
    patch_map = invert(minmax_normalize(patch_similarity_map(features, centroids)))
    pixel_map = upsample_bilinear(patch_map, out_h, out_w)
    return patch_map, pixel_map
