"""Reference-quality comparison metrics used by the per-view score.

All functions take images as produced by :func:`castkit.imageio.as_image`.
SSIM is evaluated on luma over valid (unpadded) Gaussian-weighted windows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, ShapeError, TableLookupError
from .imageio import as_image, check_same_shape, to_luma


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    gaussian_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ConfigError(f"window_size must be odd and >= 3, got {self.window_size}")
        if not self.gaussian_sigma > 0:
            raise ConfigError("gaussian_sigma must be positive")
        if not (self.k1 > 0 and self.k2 > 0):
            raise ConfigError("k1 and k2 must be positive")
        if not self.dynamic_range > 0:
            raise ConfigError("dynamic_range must be positive")


@dataclass(frozen=True)
class PerceptualConfig:
    """Perceptual-distance slot.

    ``gradient_proxy`` averages (1 - SSIM) of gradient-magnitude images over
    ``scales`` dyadic levels. ``external_table`` reads distances computed
    offline (e.g. true LPIPS) from a JSON object keyed by frame index.
    """

    mode: Literal["gradient_proxy", "external_table"] = "gradient_proxy"
    scales: int = 3
    table_path: str | None = None

    def __post_init__(self):
        if self.mode not in ("gradient_proxy", "external_table"):
            raise ConfigError(f"unknown perceptual mode {self.mode!r}")
        if self.scales < 1:
            raise ConfigError("perceptual scales must be >= 1")
        if self.mode == "external_table":
            if self.table_path is None or not Path(self.table_path).is_file():
                raise ConfigError(f"perceptual table not readable: {self.table_path}")


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = as_image(a)
    b = as_image(b)
    check_same_shape(a, b)
    return a, b


def mse(a, b) -> float:
    """Mean over all samples of the squared difference."""
    a, b = _pair(a, b)
    d = a - b
    return float(np.mean(d * d))


def psnr(a, b, dynamic_range: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; ``math.inf`` when the images are equal."""
    return psnr_from_mse(mse(a, b), dynamic_range)


def psnr_from_mse(err: float, dynamic_range: float = 1.0) -> float:
    if err == 0:
        return math.inf
    return 10.0 * math.log10(dynamic_range**2 / err)


@lru_cache(maxsize=16)
def gaussian_kernel_1d(window_size: int, sigma: float) -> np.ndarray:
    r = window_size // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    g.setflags(write=False)
    return g


def _window_mean(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Gaussian-weighted mean over every window that fits inside ``x``."""
    # windowed views + matmul only ever evaluate fully-inside windows; both
    # passes slide along rows, which keeps the matmul on a strided fast path
    out = sliding_window_view(x, len(g), axis=0) @ g
    out = np.ascontiguousarray(out.T)
    return (sliding_window_view(out, len(g), axis=0) @ g).T


def ssim_map(x: np.ndarray, y: np.ndarray, p: SsimParams = SsimParams()) -> np.ndarray:
    """Per-window SSIM index of two 2-D arrays (valid windows only)."""
    if min(x.shape) < p.window_size:
        raise ShapeError(
            f"image {x.shape[1]}x{x.shape[0]} smaller than SSIM window {p.window_size}"
        )
    g = gaussian_kernel_1d(p.window_size, float(p.gaussian_sigma))
    c1 = (p.k1 * p.dynamic_range) ** 2
    c2 = (p.k2 * p.dynamic_range) ** 2
    mu_x, mu_y, xx, yy, xy = (_window_mean(m, g) for m in (x, y, x * x, y * y, x * y))
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return num / den


def ssim(a, b, p: SsimParams = SsimParams()) -> float:
    """Mean SSIM over all valid window positions, computed on luma."""
    a, b = _pair(a, b)
    return float(np.mean(ssim_map(to_luma(a), to_luma(b), p)))


def gradient_magnitude(x: np.ndarray) -> np.ndarray:
    """Central-difference gradient magnitude, clamped to [0, 1].

    Edge rows/columns use one-sided differences.
    """
    gy, gx = np.gradient(x)
    return np.clip(np.sqrt(gx * gx + gy * gy), 0.0, 1.0)


def downsample2(x: np.ndarray) -> np.ndarray:
    """2x2 box average; an odd trailing row/column is dropped."""
    h, w = (x.shape[0] // 2) * 2, (x.shape[1] // 2) * 2
    x = x[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def gradient_proxy_distance(a, b, scales: int = 3, p: SsimParams = SsimParams()) -> float:
    a, b = _pair(a, b)
    la, lb = to_luma(a), to_luma(b)
    terms = []
    for s in range(scales):
        if s:
            la, lb = downsample2(la), downsample2(lb)
        terms.append(1.0 - float(np.mean(ssim_map(gradient_magnitude(la), gradient_magnitude(lb), p))))
    return float(np.mean(terms))


@lru_cache(maxsize=8)
def _read_table(path: str) -> dict[int, float]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"perceptual table {path} must be a JSON object")
    table = {}
    for key, value in raw.items():
        try:
            table[int(key)] = float(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad perceptual table entry {key!r}: {value!r}") from exc
    return table


def load_perceptual_table(path: str | Path) -> dict[int, float]:
    return dict(_read_table(str(Path(path).resolve())))


def perceptual_distance(
    a,
    b,
    cfg: PerceptualConfig = PerceptualConfig(),
    frame: int | None = None,
    ssim_params: SsimParams = SsimParams(),
) -> float:
    """Perceptual distance between two images.

    In ``external_table`` mode the images are only shape-checked and the
    distance for ``frame`` is read from the table.
    """
    if cfg.mode == "external_table":
        _pair(a, b)
        table = _read_table(str(Path(cfg.table_path).resolve()))
        if frame is None or frame not in table:
            raise TableLookupError(frame, cfg.table_path)
        return table[frame]
    return gradient_proxy_distance(a, b, cfg.scales, ssim_params)
