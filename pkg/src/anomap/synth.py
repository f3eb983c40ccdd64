"""Synthetic benchmark generator: a desk-scale dataset with a known planted
anomaly, so the whole pipeline can be exercised and scored without any real
imagery or feature extractor.

Construction. A set of mutually orthonormal directions is drawn per dataset:
two foreground prototypes per appearance mode (a majority direction and a
minority direction used by a strip of the foreground), one background base,
and one anomaly direction orthogonal to every prototype. Normal images place
prototype-plus-noise features on a rectangular foreground region over a
tilted-background surround; queries copy a pool member's features and
overwrite a patch rectangle with the anomaly direction. With more than one
mode, the modes use disjoint prototype pairs, which makes a cross-mode
support image useless and gives the support-selection ablation its signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .manifest import DatasetManifest, ManifestEntry, load_manifest, write_manifest
from .pgm import write_pgm
from .tensor_io import write_tensor

NOISE_SIGMA = 0.05  # feature noise magnitude relative to the unit prototypes
# Background overlap with the mode's majority prototype. High enough that
# background patches stay clearly less anomalous than the planted rectangle's
# bilinear boundary band, low enough that modes remain separable by embedding.
BG_TILT = 0.85


@dataclass
class SynthConfig:
    out_root: Path
    seed: int = 0
    n_normals: int = 20
    n_queries: int = 10
    grid_hp: int = 16
    grid_wp: int = 16
    dim: int = 32
    anomaly_rect: tuple[int, int, int, int] = (6, 8, 4, 4)  # row, col, h, w in patches
    patch_size: int = 8
    modes: int = 1

    def validate(self) -> None:
        if self.grid_hp < 2 or self.grid_wp < 2:
            raise ValidationError("patch grid must be at least 2x2")
        if self.modes < 1:
            raise ValidationError("modes must be >= 1")
        if self.dim < 2 * self.modes + 2 or self.dim < 4:
            raise ValidationError(
                f"dim={self.dim} too small for {self.modes} mode(s); "
                f"need >= max(4, 2*modes+2) orthonormal directions"
            )
        if self.n_normals < 1 or self.n_queries < 0:
            raise ValidationError("need >= 1 normal and >= 0 queries")
        if self.patch_size < 1:
            raise ValidationError("patch_size must be >= 1")


def _orthonormal_rows(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    basis, _ = np.linalg.qr(rng.normal(size=(dim, count)))
    return basis.T.copy()


def _foreground_layout(hp: int, wp: int) -> tuple[slice, slice, slice]:
    """(fg row slice, fg col slice, minority col slice within the grid)."""
    mr = max(1, hp // 8)
    mc = max(1, wp // 8)
    rows = slice(mr, hp - mr)
    cols = slice(mc, wp - mc)
    minority_w = max(1, (cols.stop - cols.start) // 6)
    minority = slice(cols.start, cols.start + minority_w)
    return rows, cols, minority


def _noise(rng: np.random.Generator, shape, dim: int) -> np.ndarray:
    return rng.normal(scale=NOISE_SIGMA / np.sqrt(dim), size=(*shape, dim))


def run_synth(config: SynthConfig) -> DatasetManifest:
    """Generate the dataset under config.out_root and return its (validated)
    manifest. Identical configs produce byte-identical trees."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    hp, wp, dim, ps = config.grid_hp, config.grid_wp, config.dim, config.patch_size

    dirs = _orthonormal_rows(rng, 2 * config.modes + 2, dim)
    majors = dirs[0 : 2 * config.modes : 2]
    minors = dirs[1 : 2 * config.modes : 2]
    bg_base = dirs[-2]
    anomaly_dir = dirs[-1]
    bg_dirs = np.sqrt(1.0 - BG_TILT**2) * bg_base + BG_TILT * majors

    rows, cols, minority = _foreground_layout(hp, wp)

    root = Path(config.out_root).resolve()
    for sub in ("images", "masks", "feats"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    def base_features(mode: int) -> np.ndarray:
        feats = np.empty((hp, wp, dim))
        feats[:, :] = bg_dirs[mode]
        feats[rows, cols] = majors[mode]
        feats[rows, minority] = minors[mode]
        return feats

    def raster(intensity: int) -> np.ndarray:
        img = np.zeros((hp * ps, wp * ps), dtype=np.uint8)
        img[rows.start * ps : rows.stop * ps, cols.start * ps : cols.stop * ps] = intensity
        return img

    def write_entry(entry_id: str, feats: np.ndarray, img: np.ndarray,
                    mask: np.ndarray | None) -> ManifestEntry:
        image_path = root / "images" / f"{entry_id}.pgm"
        embed_path = root / "feats" / f"{entry_id}.embed.dadf"
        patch_path = root / "feats" / f"{entry_id}.patch.dadf"
        write_pgm(img, image_path)
        write_tensor(feats.reshape(-1, dim).mean(axis=0), embed_path)
        write_tensor(feats, patch_path)
        mask_path = None
        if mask is not None:
            mask_path = root / "masks" / f"{entry_id}.pgm"
            write_pgm(mask, mask_path)
        return ManifestEntry(
            id=entry_id,
            embed_path=embed_path,
            patch_path=patch_path,
            image_path=image_path,
            mask_path=mask_path,
        )

    normal_feats = []
    normal_imgs = []
    normal_entries = []
    for i in range(config.n_normals):
        mode = i % config.modes
        feats = base_features(mode) + _noise(rng, (hp, wp), dim)
        img = raster(150 + (i * 7) % 80)
        normal_feats.append(feats)
        normal_imgs.append(img)
        normal_entries.append(write_entry(f"n{i:03d}", feats, img, mask=None))

    r0, c0, rh, rw = config.anomaly_rect
    rect_rows = slice(max(0, r0), min(hp, r0 + max(0, rh)))
    rect_cols = slice(max(0, c0), min(wp, c0 + max(0, rw)))
    rect_h = max(0, rect_rows.stop - rect_rows.start)
    rect_w = max(0, rect_cols.stop - rect_cols.start)

    query_entries = []
    for j in range(config.n_queries):
        donor = j % config.n_normals
        feats = normal_feats[donor].copy()
        mask = np.zeros((hp * ps, wp * ps), dtype=np.uint8)
        if rect_h > 0 and rect_w > 0:
            feats[rect_rows, rect_cols] = anomaly_dir + _noise(
                rng, (rect_h, rect_w), dim
            )
            mask[
                rect_rows.start * ps : rect_rows.stop * ps,
                rect_cols.start * ps : rect_cols.stop * ps,
            ] = 255
        query_entries.append(
            write_entry(f"q{j:03d}", feats, normal_imgs[donor], mask=mask)
        )

    manifest = DatasetManifest(
        root=root,
        patch_size=ps,
        feature_dim=dim,
        normal_entries=normal_entries,
        query_entries=query_entries,
    )
    write_manifest(manifest)
    return load_manifest(root)
