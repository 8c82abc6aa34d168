"""Keypoint matching for view-pair geometric consistency.

Single-scale ORB-style pipeline: FAST-9 corners with greedy non-maximum
suppression, intensity-centroid orientation, and a 256-bit rotated BRIEF
descriptor matched by brute-force Hamming distance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from PIL import Image, ImageDraw
from scipy.ndimage import uniform_filter

from ._brief_pattern import BRIEF_PATTERN
from .errors import ConfigError, EmptyDatasetError, ShapeError
from .imageio import as_image, to_luma, to_uint8

# Bresenham circle of radius 3, clockwise from 12 o'clock, as (dx, dy)
FAST_CIRCLE = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)
FAST_ARC = 9
PATCH_SIZE = 31
PATCH_RADIUS = PATCH_SIZE // 2
ORIENTATION_RADIUS = 15
# keypoints keep a margin that fits the descriptor patch and the FAST circle
BORDER = PATCH_RADIUS + 1
MIN_IMAGE_SIZE = 64
DESCRIPTOR_BITS = 256

_PATTERN = np.array(BRIEF_PATTERN, dtype=np.float64)


@dataclass(frozen=True)
class MatchConfig:
    fast_threshold: float = 20 / 255
    max_keypoints: int = 1000
    nms_radius: int = 7
    max_distance: int = 64
    cross_check: bool = True

    def __post_init__(self):
        if not self.fast_threshold > 0:
            raise ConfigError("fast_threshold must be > 0")
        if self.max_keypoints < 1 or self.nms_radius < 0:
            raise ConfigError("max_keypoints must be >= 1 and nms_radius >= 0")
        if not 0 <= self.max_distance <= DESCRIPTOR_BITS:
            raise ConfigError(f"max_distance must lie in [0, {DESCRIPTOR_BITS}]")


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    response: float
    orientation: float


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """Descriptors plus the keypoints they belong to.

    ``bits`` is (N, 32) uint8, one packed 256-bit descriptor per row.
    ``dropped`` lists input keypoint indices rejected for violating the margin.
    """

    keypoints: list[Keypoint]
    bits: np.ndarray
    dropped: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.keypoints)


@dataclass(frozen=True)
class MatchSet:
    pairs: list[tuple[int, int, int]]
    max_distance: int
    cross_check: bool

    def __len__(self) -> int:
        return len(self.pairs)


def _gray(img) -> np.ndarray:
    g = to_luma(as_image(img))
    if min(g.shape) < MIN_IMAGE_SIZE:
        raise ShapeError(f"image {g.shape[1]}x{g.shape[0]} smaller than {MIN_IMAGE_SIZE}x{MIN_IMAGE_SIZE}")
    return g


def fast_scores(gray: np.ndarray, threshold: float) -> np.ndarray:
    """FAST-9 corner response for every pixel (0 for non-corners and the border).

    The response is the summed absolute excess over ``threshold`` of the
    circle pixels on the winning (brighter or darker) side.
    """
    h, w = gray.shape
    b = BORDER
    core = gray[b : h - b, b : w - b]
    ring = np.stack([gray[b + dy : h - b + dy, b + dx : w - b + dx] for dx, dy in FAST_CIRCLE])
    diff = ring - core
    brighter = diff > threshold
    darker = diff < -threshold

    def has_arc(flags: np.ndarray) -> np.ndarray:
        ext = np.concatenate([flags, flags[: FAST_ARC - 1]], axis=0).astype(np.int16)
        csum = np.concatenate([np.zeros((1,) + ext.shape[1:], np.int16), np.cumsum(ext, axis=0)])
        runs = csum[FAST_ARC:] - csum[:-FAST_ARC]
        return (runs[: len(FAST_CIRCLE)] == FAST_ARC).any(axis=0)

    corner = has_arc(brighter) | has_arc(darker)
    excess = np.abs(diff) - threshold
    resp = np.maximum(
        np.where(brighter, excess, 0.0).sum(axis=0),
        np.where(darker, excess, 0.0).sum(axis=0),
    )
    out = np.zeros_like(gray)
    out[b : h - b, b : w - b] = np.where(corner, resp, 0.0)
    return out


def _orientation_offsets() -> tuple[np.ndarray, np.ndarray]:
    r = ORIENTATION_RADIUS
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    inside = x * x + y * y <= r * r
    return x[inside], y[inside]


_OX, _OY = _orientation_offsets()


def intensity_centroid_angle(gray: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    patch = gray[ys[:, None] + _OY[None, :], xs[:, None] + _OX[None, :]]
    m10 = patch @ _OX.astype(np.float64)
    m01 = patch @ _OY.astype(np.float64)
    return np.arctan2(m01, m10)


def nms_greedy(resp: np.ndarray, radius: int, limit: int) -> tuple[np.ndarray, np.ndarray]:
    """Strongest-first suppression in a (2r+1)^2 window; ties break by (y, x)."""
    ys, xs = np.nonzero(resp > 0)
    vals = resp[ys, xs]
    order = np.lexsort((xs, ys, -vals))
    taken = np.zeros(resp.shape, dtype=bool)
    h, w = resp.shape
    keep = []
    for k in order:
        y, x = ys[k], xs[k]
        if taken[y, x]:
            continue
        keep.append(k)
        if len(keep) == limit:
            break
        taken[max(y - radius, 0) : min(y + radius + 1, h), max(x - radius, 0) : min(x + radius + 1, w)] = True
    keep = np.array(keep, dtype=np.int64)
    return xs[keep], ys[keep]


def detect_keypoints(img, cfg: MatchConfig = MatchConfig()) -> list[Keypoint]:
    gray = _gray(img)
    resp = fast_scores(gray, cfg.fast_threshold)
    xs, ys = nms_greedy(resp, cfg.nms_radius, cfg.max_keypoints)
    if len(xs) == 0:
        return []
    angles = intensity_centroid_angle(gray, xs, ys)
    return [
        Keypoint(float(x), float(y), float(resp[y, x]), float(a))
        for x, y, a in zip(xs, ys, angles)
    ]


def compute_descriptors(img, kps: list[Keypoint]) -> DescriptorSet:
    """Rotated BRIEF-256 on a 5x5 box-smoothed image."""
    gray = to_luma(as_image(img))
    smooth = uniform_filter(gray, size=5, mode="reflect")
    h, w = gray.shape
    kept, dropped, rows = [], [], []
    for i, kp in enumerate(kps):
        x, y = int(round(kp.x)), int(round(kp.y))
        if not (PATCH_RADIUS <= x < w - PATCH_RADIUS and PATCH_RADIUS <= y < h - PATCH_RADIUS):
            dropped.append(i)
            continue
        c, s = np.cos(kp.orientation), np.sin(kp.orientation)
        px = _PATTERN[:, [0, 2]]
        py = _PATTERN[:, [1, 3]]
        rx = np.rint(c * px - s * py).astype(np.int64) + x
        ry = np.rint(s * px + c * py).astype(np.int64) + y
        vals = smooth[ry, rx]
        rows.append(vals[:, 0] < vals[:, 1])
        kept.append(kp)
    bits = np.packbits(np.array(rows, dtype=bool).reshape(-1, DESCRIPTOR_BITS), axis=1)
    return DescriptorSet(kept, bits, dropped)


def _as_bits(desc) -> np.ndarray:
    bits = desc.bits if isinstance(desc, DescriptorSet) else np.asarray(desc, dtype=np.uint8)
    return bits.reshape(-1, DESCRIPTOR_BITS // 8)


def hamming_matrix(a, b) -> np.ndarray:
    """All-pairs Hamming distances between packed descriptors, shape (Na, Nb)."""
    wa = np.ascontiguousarray(_as_bits(a)).view(np.uint64)
    wb = np.ascontiguousarray(_as_bits(b)).view(np.uint64)
    return np.bitwise_count(wa[:, None, :] ^ wb[None, :, :]).sum(axis=2, dtype=np.int64)


def match_pair(desc_a, desc_b, cfg: MatchConfig = MatchConfig()) -> MatchSet:
    """Brute-force nearest-neighbour matching under a Hamming cutoff.

    The nearest neighbour on ties is the lowest index. With cross-check only
    mutual nearest neighbours survive.
    """
    a, b = _as_bits(desc_a), _as_bits(desc_b)
    if len(a) == 0:
        raise EmptyDatasetError("first descriptor list is empty")
    if len(b) == 0:
        raise EmptyDatasetError("second descriptor list is empty")
    d = hamming_matrix(a, b)
    nn_ab = d.argmin(axis=1)
    ia = np.arange(len(a))
    keep = d[ia, nn_ab] <= cfg.max_distance
    if cfg.cross_check:
        nn_ba = d.argmin(axis=0)
        keep &= nn_ba[nn_ab] == ia
    pairs = [(int(i), int(nn_ab[i]), int(d[i, nn_ab[i]])) for i in ia[keep]]
    return MatchSet(pairs, cfg.max_distance, cfg.cross_check)


@dataclass(frozen=True, eq=False)
class PairMatch:
    desc_a: DescriptorSet
    desc_b: DescriptorSet
    matches: MatchSet | None  # None when either image has no usable keypoints


def match_images(a, b, cfg: MatchConfig = MatchConfig()) -> PairMatch:
    da = compute_descriptors(a, detect_keypoints(a, cfg))
    db = compute_descriptors(b, detect_keypoints(b, cfg))
    if len(da) == 0 or len(db) == 0:
        return PairMatch(da, db, None)
    return PairMatch(da, db, match_pair(da, db, cfg))


def consistency_report(original_pair, edited_pair, cfg: MatchConfig = MatchConfig()) -> tuple[dict, list[PairMatch]]:
    """Matched-pair counts for the original and edited view pairs.

    Returns the report dict and the two :class:`PairMatch` results (for
    drawing). ``ratio`` is edited/original, or None when undefined.
    """
    orig = match_images(*original_pair, cfg)
    edit = match_images(*edited_pair, cfg)
    o = None if orig.matches is None else len(orig.matches)
    e = None if edit.matches is None else len(edit.matches)
    ratio = e / o if (o and e is not None) else None
    report = {
        "original_matches": o,
        "edited_matches": e,
        "ratio": ratio,
        "degraded": orig.matches is None or edit.matches is None,
        "keypoints": {
            "original": [len(orig.desc_a), len(orig.desc_b)],
            "edited": [len(edit.desc_a), len(edit.desc_b)],
        },
        "params": asdict(cfg),
    }
    return report, [orig, edit]


def draw_matches(a, b, pm: PairMatch, color=(0, 255, 0)) -> np.ndarray:
    """Side-by-side RGB uint8 composite with 1-px match lines."""
    a8 = to_uint8(np.atleast_3d(as_image(a)) * np.ones(3))
    b8 = to_uint8(np.atleast_3d(as_image(b)) * np.ones(3))
    h = max(a8.shape[0], b8.shape[0])
    canvas = np.zeros((h, a8.shape[1] + b8.shape[1], 3), dtype=np.uint8)
    canvas[: a8.shape[0], : a8.shape[1]] = a8
    canvas[: b8.shape[0], a8.shape[1] :] = b8
    im = Image.fromarray(canvas)
    draw = ImageDraw.Draw(im)
    off = a8.shape[1]
    for ia, ib, _ in (pm.matches.pairs if pm.matches else []):
        ka, kb = pm.desc_a.keypoints[ia], pm.desc_b.keypoints[ib]
        draw.line([(ka.x, ka.y), (kb.x + off, kb.y)], fill=color, width=1)
    return np.asarray(im)


def composite(original_pair, edited_pair, results: list[PairMatch]) -> np.ndarray:
    """Original pair on top, edited pair below."""
    top = draw_matches(*original_pair, results[0])
    bottom = draw_matches(*edited_pair, results[1])
    w = max(top.shape[1], bottom.shape[1])
    out = np.zeros((top.shape[0] + bottom.shape[0], w, 3), dtype=np.uint8)
    out[: top.shape[0], : top.shape[1]] = top
    out[top.shape[0] :, : bottom.shape[1]] = bottom
    return out
