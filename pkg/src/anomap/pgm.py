"""Minimal binary PGM (P5) writing for heatmaps, masks and synthetic
rasters. Reading of arbitrary image formats goes through Pillow in the
pipeline layer; writing P5 by hand keeps output bytes fully under our
control for reproducibility checks.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_pgm(values: np.ndarray, path: str | Path) -> None:
    """Write a 2-D uint8 array as binary PGM (P5, maxval 255)."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"PGM needs a 2-D array, got shape {arr.shape}")
    arr = arr.astype(np.uint8)
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes(order="C"))


def heatmap_to_pgm(map01: np.ndarray, path: str | Path) -> None:
    """Quantize a [0,1] map to 8 bits (round(255*v)) and write as P5."""
    arr = np.asarray(map01, dtype=np.float64)
    write_pgm(np.rint(255.0 * np.clip(arr, 0.0, 1.0)).astype(np.uint8), path)
