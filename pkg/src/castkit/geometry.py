"""Added-object mask propagation through a pixel-aligned point map.

Pixels of the first-frame object mask are lifted to 3D through that frame's
point map, then transferred to every other frame either by pinhole
projection (when cameras are known) or by a nearest-point search against
the other frames' point maps. The bounding box of the transferred pixels
becomes that frame's mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from ._parallel import parallel_map
from .errors import ConfigError, EmptyObjectError, ShapeError
from .masking import MaskSequence, reset_first_valid


@dataclass(frozen=True, eq=False)
class CameraParams:
    """Pinhole intrinsics plus a world-to-camera rigid transform."""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray
    translation: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", t)
        if not (self.fx > 0 and self.fy > 0):
            raise ConfigError(f"focal lengths must be positive, got {self.fx}, {self.fy}")
        if not (self.width > 0 and self.height > 0):
            raise ConfigError("camera image size must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ConfigError(f"principal point ({self.cx}, {self.cy}) outside the image")
        if not np.all(np.isfinite(rot)) or not np.all(np.isfinite(t)):
            raise ConfigError("camera pose must be finite")
        if np.abs(rot @ rot.T - np.eye(3)).max() > 1e-6 or abs(np.linalg.det(rot) - 1.0) > 1e-6:
            raise ConfigError("rotation must be orthonormal with determinant +1")

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation

    def to_json(self) -> dict:
        return {
            "fx": float(self.fx),
            "fy": float(self.fy),
            "cx": float(self.cx),
            "cy": float(self.cy),
            "rotation": [float(v) for v in self.rotation.ravel()],
            "translation": [float(v) for v in self.translation],
            "width": int(self.width),
            "height": int(self.height),
        }

    @classmethod
    def from_json(cls, d: dict) -> "CameraParams":
        try:
            rot = d["rotation"]
            if len(rot) != 9 or len(d["translation"]) != 3:
                raise ConfigError("camera rotation needs 9 numbers and translation 3")
            return cls(
                fx=float(d["fx"]),
                fy=float(d["fy"]),
                cx=float(d["cx"]),
                cy=float(d["cy"]),
                rotation=np.array(rot, dtype=np.float64).reshape(3, 3),
                translation=np.array(d["translation"], dtype=np.float64),
                width=int(d["width"]),
                height=int(d["height"]),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed camera record: {exc}") from exc


@dataclass(frozen=True, eq=False)
class PointMap:
    """Per-pixel world coordinates; ``points`` is (H, W, 3), ``validity`` (H, W)."""

    points: np.ndarray
    validity: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 3 or pts.shape[2] != 3:
            raise ShapeError(f"point map must be (H, W, 3), got {pts.shape}")
        valid = np.asarray(self.validity, dtype=bool)
        if valid.shape != pts.shape[:2]:
            raise ShapeError("validity must match point map dimensions")
        valid = valid & np.all(np.isfinite(pts), axis=2)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "validity", valid)

    @classmethod
    def from_points(cls, points: np.ndarray) -> "PointMap":
        """Build from (H, W, 3) points, treating non-finite entries as invalid."""
        pts = np.asarray(points, dtype=np.float64)
        return cls(pts, np.all(np.isfinite(pts), axis=2))

    @property
    def height(self) -> int:
        return self.points.shape[0]

    @property
    def width(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class ObjectPoints:
    coords: np.ndarray  # (N, 3) world points
    source_pixels: np.ndarray  # (N, 2) integer (x, y) in the first frame

    def __len__(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class PropagationConfig:
    pad_fraction: float = 0.05
    radius: float = 0.05

    def __post_init__(self):
        if not self.pad_fraction >= 0:
            raise ConfigError("pad_fraction must be >= 0")
        if not self.radius > 0:
            raise ConfigError("radius must be > 0")


def round_half_away(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def project_points(cam: CameraParams, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized pinhole projection of (N, 3) world points.

    Returns ``(uv, depth, in_front)``; ``uv`` rows for points with
    ``in_front == False`` are NaN.
    """
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    q = pts @ cam.rotation.T + cam.translation
    depth = q[:, 2]
    in_front = depth > 0
    uv = np.full((len(q), 2), np.nan)
    z = depth[in_front]
    uv[in_front, 0] = cam.fx * q[in_front, 0] / z + cam.cx
    uv[in_front, 1] = cam.fy * q[in_front, 1] / z + cam.cy
    return uv, depth, in_front


def project_point(cam: CameraParams, p) -> tuple[float, float, float] | None:
    """Project one world point to ``(u, v, depth)``; ``None`` if it is behind the camera."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise ValueError(f"expected a finite 3-vector, got {p!r}")
    q = cam.rotation @ p + cam.translation
    if q[2] <= 0:
        return None
    return (
        float(cam.fx * q[0] / q[2] + cam.cx),
        float(cam.fy * q[1] / q[2] + cam.cy),
        float(q[2]),
    )


def unproject_pixels(cam: CameraParams, uv: np.ndarray, depth: np.ndarray) -> np.ndarray:
    """World points seen at pixel coordinates ``uv`` (N, 2) with camera depth ``depth``."""
    uv = np.asarray(uv, dtype=np.float64).reshape(-1, 2)
    depth = np.asarray(depth, dtype=np.float64).reshape(-1)
    q = np.empty((len(uv), 3))
    q[:, 0] = (uv[:, 0] - cam.cx) / cam.fx * depth
    q[:, 1] = (uv[:, 1] - cam.cy) / cam.fy * depth
    q[:, 2] = depth
    return (q - cam.translation) @ cam.rotation


def lift_mask_pixels(pm: PointMap, mask: np.ndarray) -> ObjectPoints:
    """3D points for every masked and valid pixel, in row-major order."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (pm.height, pm.width):
        raise ShapeError(
            f"mask {mask.shape[1]}x{mask.shape[0]} does not match point map {pm.width}x{pm.height}"
        )
    ys, xs = np.nonzero(mask & pm.validity)
    if len(ys) == 0:
        raise EmptyObjectError("mask selects no valid point-map pixels")
    return ObjectPoints(
        coords=pm.points[ys, xs].copy(),
        source_pixels=np.stack([xs, ys], axis=1).astype(np.int64),
    )


def project_object_to_view(obj: ObjectPoints, cam: CameraParams) -> np.ndarray:
    """Integer (u, v) of object points that land inside ``cam``'s frame, shape (M, 2)."""
    if len(obj) == 0:
        raise EmptyObjectError("no object points to project")
    uv, _, in_front = project_points(cam, obj.coords)
    pix = round_half_away(np.nan_to_num(uv[in_front]))
    ok = (pix[:, 0] >= 0) & (pix[:, 0] < cam.width) & (pix[:, 1] >= 0) & (pix[:, 1] < cam.height)
    return pix[ok]


def bbox_mask(pixels, width: int, height: int, pad_fraction: float = 0.0) -> np.ndarray:
    """Filled, padded, frame-clamped bounding box of ``pixels`` as an (H, W) bool mask."""
    mask = np.zeros((height, width), dtype=bool)
    pix = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
    if len(pix) == 0:
        return mask
    x0, y0 = pix.min(axis=0)
    x1, y1 = pix.max(axis=0)
    pad = int(np.floor(pad_fraction * max(x1 - x0, y1 - y0)))
    x0, y0 = max(x0 - pad, 0), max(y0 - pad, 0)
    x1, y1 = min(x1 + pad, width - 1), min(y1 + pad, height - 1)
    if x0 <= x1 and y0 <= y1:
        mask[y0 : y1 + 1, x0 : x1 + 1] = True
    return mask


def near_object_pixels(obj: ObjectPoints, pm: PointMap, radius: float) -> np.ndarray:
    """(x, y) of valid point-map pixels within ``radius`` of any object point."""
    tree = cKDTree(obj.coords)
    ys, xs = np.nonzero(pm.validity)
    if len(ys) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    dist, _ = tree.query(pm.points[ys, xs], k=1, distance_upper_bound=radius)
    hit = dist <= radius
    return np.stack([xs[hit], ys[hit]], axis=1).astype(np.int64)


def propagate_added_object_masks(
    first_mask: np.ndarray,
    pointmaps: Sequence[PointMap],
    cams: Sequence[CameraParams] | None = None,
    cfg: PropagationConfig = PropagationConfig(),
    workers: int | None = None,
) -> MaskSequence:
    """Masks for an object that only exists in the first frame.

    With ``cams`` each later frame gets the bounding box of the lifted points
    projected into its camera; without, the bounding box of its point-map
    pixels lying within ``cfg.radius`` of the lifted points. The first frame
    is reset to fully valid.
    """
    n = len(pointmaps)
    if n == 0:
        raise ShapeError("no point maps given")
    if cams is not None and len(cams) != n:
        raise ShapeError(f"{len(cams)} cameras for {n} point maps")
    obj = lift_mask_pixels(pointmaps[0], first_mask)

    if cams is not None:
        def frame_mask(i: int) -> np.ndarray:
            cam = cams[i]
            return bbox_mask(project_object_to_view(obj, cam), cam.width, cam.height, cfg.pad_fraction)
    else:
        def frame_mask(i: int) -> np.ndarray:
            pm = pointmaps[i]
            return bbox_mask(near_object_pixels(obj, pm, cfg.radius), pm.width, pm.height, cfg.pad_fraction)

    first = np.zeros_like(np.asarray(first_mask, dtype=bool))
    masks = [first] + parallel_map(frame_mask, range(1, n), workers)
    shapes = {m.shape for m in masks}
    if len(shapes) != 1:
        raise ShapeError(f"propagated masks have mixed dimensions: {sorted(shapes)}")
    return reset_first_valid(MaskSequence(masks, semantics="edit_region"))
