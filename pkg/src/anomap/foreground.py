"""Foreground mask construction on the support image: non-zero
binarization, morphological closing to fill small holes, and a fractional
vote down to the patch grid so clustering sees only foreground features.

Masks are plain boolean numpy arrays (False = background).
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import ValidationError


def binarize_nonzero(image: np.ndarray) -> np.ndarray:
    """Pixel is foreground iff its value is non-zero (any channel for RGB)."""
    image = np.asarray(image)
    if image.size == 0:
        raise ValidationError("image is empty")
    if image.ndim == 2:
        return image > 0
    if image.ndim == 3:
        return np.any(image > 0, axis=2)
    raise ValidationError(f"expected HxW or HxWxC image, got ndim={image.ndim}")


def morphological_close(mask: np.ndarray, radius: int) -> np.ndarray:
    """Dilation then erosion with a (2*radius+1)-square structuring element.

    Outside pixels count as background for the dilation and as foreground
    for the erosion, so a mask touching the border is never eaten away.
    """
    if radius < 0:
        raise ValidationError(f"closing radius must be >= 0, got {radius}")
    mask = np.asarray(mask, dtype=bool)
    if radius == 0:
        return mask.copy()
    selem = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    dilated = ndimage.binary_dilation(mask, structure=selem, border_value=0)
    return ndimage.binary_erosion(dilated, structure=selem, border_value=1)


def to_patch_mask(mask: np.ndarray, patch_size: int, tau: float = 0.5) -> np.ndarray:
    """Downsample a pixel mask to the patch grid by fractional vote.

    A patch is foreground iff at least `tau` of its patch_size x patch_size
    window is foreground. Rows/columns beyond the last full patch are
    dropped, matching the grid the feature extractor produces.
    """
    mask = np.asarray(mask, dtype=bool)
    if patch_size < 1:
        raise ValidationError(f"patch_size must be >= 1, got {patch_size}")
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must be in (0, 1], got {tau}")
    h, w = mask.shape
    hp, wp = h // patch_size, w // patch_size
    if hp < 1 or wp < 1:
        raise ValidationError(
            f"mask {mask.shape} smaller than one {patch_size}x{patch_size} patch"
        )
    windows = mask[: hp * patch_size, : wp * patch_size].reshape(
        hp, patch_size, wp, patch_size
    )
    fraction = windows.sum(axis=(1, 3)) / float(patch_size * patch_size)
    return fraction >= tau
