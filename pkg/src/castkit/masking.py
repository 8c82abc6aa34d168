"""First-frame difference masks and mask-sequence handling.

Masks are (H, W) bool arrays, True for the marked region. A sequence with
``validity`` semantics has its first mask fully set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import ndimage

from .errors import ConfigError, EmptyDatasetError, ShapeError
from .imageio import as_image, check_same_shape, to_luma

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class DiffConfig:
    threshold: float = 0.1
    open_radius: int = 2
    close_radius: int = 4
    min_area_fraction: float = 5e-4
    mode: Literal["luma", "max_channel"] = "luma"

    def __post_init__(self):
        if not self.threshold >= 0:
            raise ConfigError("diff threshold must be >= 0")
        if self.open_radius < 0 or self.close_radius < 0:
            raise ConfigError("morphology radii must be >= 0")
        if not 0 <= self.min_area_fraction <= 1:
            raise ConfigError("min_area_fraction must lie in [0, 1]")
        if self.mode not in ("luma", "max_channel"):
            raise ConfigError(f"unknown diff mode {self.mode!r}")


@dataclass
class MaskSequence:
    masks: list[np.ndarray]
    semantics: Literal["edit_region", "validity"] = "edit_region"
    shape: tuple[int, int] = field(init=False)

    def __post_init__(self):
        if len(self.masks) == 0:
            raise EmptyDatasetError("mask sequence is empty")
        self.masks = [np.asarray(m, dtype=bool) for m in self.masks]
        shapes = {m.shape for m in self.masks}
        if len(shapes) != 1 or self.masks[0].ndim != 2:
            raise ShapeError(f"masks must share one (H, W) shape, got {sorted(shapes)}")
        if self.semantics not in ("edit_region", "validity"):
            raise ConfigError(f"unknown mask semantics {self.semantics!r}")
        self.shape = self.masks[0].shape

    def __len__(self) -> int:
        return len(self.masks)

    def __getitem__(self, i: int) -> np.ndarray:
        return self.masks[i]


def disk(radius: int) -> np.ndarray:
    r = int(radius)
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    return x * x + y * y <= r * r


def _morph(mask: np.ndarray, radius: int, op) -> np.ndarray:
    if radius <= 0:
        return mask
    # replicate the border so regions touching the frame edge are not eroded away
    padded = np.pad(mask, radius + 1, mode="edge")
    out = op(padded, structure=disk(radius))
    r = radius + 1
    return out[r:-r, r:-r]


def opening(mask: np.ndarray, radius: int) -> np.ndarray:
    return _morph(mask, radius, ndimage.binary_opening)


def closing(mask: np.ndarray, radius: int) -> np.ndarray:
    return _morph(mask, radius, ndimage.binary_closing)


def label_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected component labels (0 = background) and their count."""
    labels, n = ndimage.label(np.asarray(mask, dtype=bool), structure=EIGHT_CONNECTED)
    return labels, int(n)


def remove_small_components(mask: np.ndarray, min_area: float) -> np.ndarray:
    labels, n = label_components(mask)
    if n == 0:
        return mask.copy()
    areas = np.bincount(labels.ravel(), minlength=n + 1)
    keep = areas >= min_area
    keep[0] = False
    return keep[labels]


def difference_candidates(original, edited, cfg: DiffConfig = DiffConfig()) -> np.ndarray:
    """Per-pixel change map before any morphology."""
    a = as_image(original)
    b = as_image(edited)
    check_same_shape(a, b)
    if cfg.mode == "luma" or a.ndim == 2:
        delta = np.abs(to_luma(a) - to_luma(b))
    else:
        delta = np.abs(a - b).max(axis=2)
    return delta > cfg.threshold


def diff_mask(original, edited, cfg: DiffConfig = DiffConfig()) -> np.ndarray:
    """Mask of the major regions where ``edited`` differs from ``original``.

    Thresholded absolute delta, then opening, closing, and removal of
    components smaller than ``min_area_fraction`` of the frame.
    """
    cand = difference_candidates(original, edited, cfg)
    m = opening(cand, cfg.open_radius)
    m = closing(m, cfg.close_radius)
    return remove_small_components(m, cfg.min_area_fraction * m.size)


def reset_first_valid(seq: MaskSequence) -> MaskSequence:
    first = np.ones(seq.shape, dtype=bool)
    return MaskSequence([first] + [m.copy() for m in seq.masks[1:]], semantics="validity")


def apply_mask(img, mask: np.ndarray, fill: float = 0.5) -> np.ndarray:
    """Copy of ``img`` with the marked region replaced by gray level ``fill``."""
    img = as_image(img)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != img.shape[:2]:
        raise ShapeError(f"mask {mask.shape} does not match image {img.shape[:2]}")
    out = img.copy()
    out[mask] = fill
    return out


def normalize_masks(frames: Sequence[np.ndarray], shape: tuple[int, int] | None = None) -> MaskSequence:
    """Binarize externally tracked masks at 128 and check their dimensions.

    Accepts uint8 arrays (or bool, passed through); ``shape`` is the expected
    (H, W) of every frame.
    """
    masks = []
    for i, f in enumerate(frames):
        a = np.asarray(f)
        if a.ndim == 3:
            a = a[:, :, 0]
        if shape is not None and a.shape != tuple(shape):
            raise ShapeError(f"mask {i} has shape {a.shape}, expected {tuple(shape)}")
        masks.append(a if a.dtype == bool else a >= 128)
    return MaskSequence(masks)


def mask_bbox(mask: np.ndarray) -> tuple[int, int, int, int] | None:
    """Inclusive (x0, y0, x1, y1) of the marked pixels, or None if empty."""
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return None
    return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())


def mask_stats(seq: MaskSequence) -> list[dict]:
    out = []
    for i, m in enumerate(seq.masks):
        _, n = label_components(m)
        out.append(
            {
                "frame": i,
                "area_fraction": float(np.count_nonzero(m) / m.size),
                "component_count": n,
                "bbox": mask_bbox(m),
            }
        )
    return out
