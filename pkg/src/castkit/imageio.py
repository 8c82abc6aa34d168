"""Image and mask rasters as numpy arrays.

Images are float64 arrays with samples in [0, 1], shaped ``(H, W)`` for
grayscale or ``(H, W, 3)`` for RGB. Masks are ``(H, W)`` bool arrays; on disk
they are 8-bit grayscale PNGs with 255 for the marked region.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import CastkitError, ShapeError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
IMAGE_SUFFIXES = (".png",)


def as_image(arr) -> np.ndarray:
    """Validate an image array and return it as float64.

    Raises ShapeError for anything that is not ``(H, W)`` or ``(H, W, 1|3)``
    or that holds samples outside [0, 1].
    """
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if img.ndim not in (2, 3) or (img.ndim == 3 and img.shape[2] != 3):
        raise ShapeError(f"expected (H, W) or (H, W, 3) image, got shape {img.shape}")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise ShapeError(f"empty image of shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ShapeError("image contains non-finite samples")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ShapeError("image samples must lie in [0, 1]")
    return img


def check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {describe_shape(a)} vs {describe_shape(b)}")


def describe_shape(img: np.ndarray) -> str:
    h, w = img.shape[:2]
    c = img.shape[2] if img.ndim == 3 else 1
    return f"{w}x{h}x{c}"


def to_luma(img: np.ndarray) -> np.ndarray:
    """BT.601 luma of an RGB image; grayscale input is returned unchanged."""
    if img.ndim == 2:
        return img
    r, g, b = LUMA_WEIGHTS
    return r * img[:, :, 0] + g * img[:, :, 1] + b * img[:, :, 2]


def load_image(path: str | Path) -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "I;16", "I", "F", "1", "LA"):
                arr = np.asarray(im.convert("L"), dtype=np.float64)
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise CastkitError(f"cannot read image {path}: {exc}") from exc
    return np.clip(arr / 255.0, 0.0, 1.0)


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(path: str | Path, img: np.ndarray) -> None:
    Image.fromarray(to_uint8(img)).save(path, format="PNG")


def load_mask(path: str | Path, threshold: int = 128) -> np.ndarray:
    """Read a mask PNG, binarizing at ``threshold`` (values >= threshold are marked)."""
    path = Path(path)
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"))
    except (OSError, ValueError) as exc:
        raise CastkitError(f"cannot read mask {path}: {exc}") from exc
    return arr >= threshold


def save_mask(path: str | Path, mask: np.ndarray) -> None:
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(data).save(path, format="PNG")


def list_images(directory: str | Path) -> list[Path]:
    """Image files in ``directory`` in lexicographic filename order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise CastkitError(f"not a directory: {directory}")
    files = sorted(
        (p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: p.name,
    )
    return files
