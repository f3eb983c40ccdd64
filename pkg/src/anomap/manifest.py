"""Dataset manifest: explicit pairing of image / embedding / patch-feature /
mask files, so nothing is inferred from directory naming conventions.

The manifest is a UTF-8 JSON document at `<root>/manifest.json`:

    {
      "patch_size": 8,
      "feature_dim": 32,
      "normal": [{"id", "image_path", "embed_path", "patch_path"}, ...],
      "query":  [{..., "mask_path": optional}, ...]
    }

Relative paths resolve against the manifest's directory. Unknown top-level
keys are ignored so producers may attach their own metadata.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError
from .tensor_io import read_header

MANIFEST_NAME = "manifest.json"


@dataclass
class ManifestEntry:
    id: str
    embed_path: Path
    patch_path: Path
    image_path: Path | None = None
    mask_path: Path | None = None


@dataclass
class DatasetManifest:
    root: Path
    patch_size: int
    feature_dim: int
    normal_entries: list[ManifestEntry] = field(default_factory=list)
    query_entries: list[ManifestEntry] = field(default_factory=list)


def _parse_entry(rec: dict, root: Path, which: str) -> ManifestEntry:
    try:
        entry_id = rec["id"]
        embed = rec["embed_path"]
        patch = rec["patch_path"]
    except KeyError as exc:
        raise ValidationError(f"{which} entry missing field {exc}") from exc

    def resolve(value):
        if value is None or value == "":
            return None
        return root / value if not os.path.isabs(value) else Path(value)

    return ManifestEntry(
        id=str(entry_id),
        embed_path=resolve(embed),
        patch_path=resolve(patch),
        image_path=resolve(rec.get("image_path")),
        mask_path=resolve(rec.get("mask_path")),
    )


def _check_entries(entries: list[ManifestEntry], which: str, feature_dim: int) -> None:
    seen: set[str] = set()
    for entry in entries:
        if entry.id in seen:
            raise ValidationError(f"duplicate {which} id {entry.id!r}")
        seen.add(entry.id)
        if entry.embed_path is None or entry.patch_path is None:
            raise ValidationError(f"{which} {entry.id!r}: embed/patch path required")
        for p in (entry.embed_path, entry.patch_path, entry.image_path, entry.mask_path):
            if p is not None and not p.exists():
                raise FileNotFoundError(f"{which} {entry.id!r}: missing file {p}")
        embed_dims = read_header(entry.embed_path)
        if embed_dims != (feature_dim,):
            raise ValidationError(
                f"{which} {entry.id!r}: embed dims {embed_dims}, expected ({feature_dim},)"
            )
        patch_dims = read_header(entry.patch_path)
        if len(patch_dims) != 3 or patch_dims[2] != feature_dim:
            raise ValidationError(
                f"{which} {entry.id!r}: patch dims {patch_dims}, "
                f"expected (hp, wp, {feature_dim})"
            )


def load_manifest(root: str | Path) -> DatasetManifest:
    """Load and validate `<root>/manifest.json`.

    Tensor headers of every referenced file are checked (shape and byte
    length) without reading payloads, so a malformed dataset fails fast.
    """
    root = Path(root)
    path = root / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"no {MANIFEST_NAME} under {root}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc

    try:
        patch_size = int(doc["patch_size"])
        feature_dim = int(doc["feature_dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: patch_size/feature_dim missing or bad") from exc
    if patch_size < 1:
        raise ValidationError(f"patch_size must be >= 1, got {patch_size}")
    if feature_dim < 1:
        raise ValidationError(f"feature_dim must be >= 1, got {feature_dim}")

    normals = [_parse_entry(r, root, "normal") for r in doc.get("normal", [])]
    queries = [_parse_entry(r, root, "query") for r in doc.get("query", [])]
    if not normals:
        raise ValidationError("manifest has no normal entries; support pool is empty")

    _check_entries(normals, "normal", feature_dim)
    _check_entries(queries, "query", feature_dim)
    return DatasetManifest(
        root=root,
        patch_size=patch_size,
        feature_dim=feature_dim,
        normal_entries=normals,
        query_entries=queries,
    )


def write_manifest(manifest: DatasetManifest) -> Path:
    """Serialize a manifest to `<root>/manifest.json` with relative paths."""
    root = manifest.root

    def encode(entry: ManifestEntry, with_mask: bool) -> dict:
        def rel(p: Path | None):
            if p is None:
                return None
            return os.path.relpath(p, root) if p.is_absolute() else str(p)

        rec = {
            "id": entry.id,
            "image_path": rel(entry.image_path),
            "embed_path": rel(entry.embed_path),
            "patch_path": rel(entry.patch_path),
        }
        if with_mask:
            rec["mask_path"] = rel(entry.mask_path)
        return rec

    doc = {
        "patch_size": manifest.patch_size,
        "feature_dim": manifest.feature_dim,
        "normal": [encode(e, with_mask=False) for e in manifest.normal_entries],
        "query": [encode(e, with_mask=True) for e in manifest.query_entries],
    }
    path = root / MANIFEST_NAME
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path
