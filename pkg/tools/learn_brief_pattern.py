"""Regenerate ``src/castkit/_brief_pattern.py``.

Candidate point pairs are drawn with a fixed seed inside the radius-15 disk.
They are evaluated as steered tests on keypoints from seeded synthetic
training images, then picked greedily: tests whose mean is closest to 0.5
first, skipping any whose |correlation| with an already chosen test exceeds
the current limit (raised in steps until 256 tests are found).

    python tools/learn_brief_pattern.py > src/castkit/_brief_pattern.py
"""

from __future__ import annotations

import sys

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from castkit.matching import MatchConfig, detect_keypoints

SEED = 20111106
N_CANDIDATES = 30000
N_IMAGES = 16
N_TESTS = 256
RADIUS = 15


def training_image(rng: np.random.Generator, h=320, w=320) -> np.ndarray:
    img = np.zeros((h, w))
    for _ in range(3):
        layer = gaussian_filter(rng.standard_normal((h, w)), rng.uniform(0.8, 8))
        img += rng.uniform(0.3, 1.0) * layer / layer.std()
    yy, xx = np.mgrid[0:h, 0:w]
    for _ in range(rng.integers(10, 40)):
        cy, cx, r = rng.uniform(0, h), rng.uniform(0, w), rng.uniform(4, 40)
        if rng.random() < 0.5:
            img[(yy - cy) ** 2 + (xx - cx) ** 2 < r * r] += rng.uniform(-2, 2)
        else:
            img[(abs(yy - cy) < r) & (abs(xx - cx) < rng.uniform(4, 40))] += rng.uniform(-2, 2)
    return (img - img.min()) / (img.max() - img.min())


def disk_points() -> np.ndarray:
    y, x = np.mgrid[-RADIUS : RADIUS + 1, -RADIUS : RADIUS + 1]
    inside = x * x + y * y <= RADIUS * RADIUS
    return np.stack([x[inside], y[inside]], axis=1)


def steered_samples(img: np.ndarray, pts: np.ndarray) -> np.ndarray:
    smooth = uniform_filter(img, size=5, mode="reflect")
    rows = []
    for kp in detect_keypoints(img, MatchConfig(max_keypoints=400)):
        c, s = np.cos(kp.orientation), np.sin(kp.orientation)
        rx = np.rint(c * pts[:, 0] - s * pts[:, 1]).astype(int) + int(kp.x)
        ry = np.rint(s * pts[:, 0] + c * pts[:, 1]).astype(int) + int(kp.y)
        rows.append(smooth[ry, rx])
    return np.array(rows)


def main() -> None:
    rng = np.random.default_rng(SEED)
    pts = disk_points()
    i1 = rng.integers(0, len(pts), N_CANDIDATES)
    i2 = rng.integers(0, len(pts), N_CANDIDATES)
    sep = np.abs(pts[i1] - pts[i2]).max(axis=1)
    i1, i2 = i1[sep >= 2], i2[sep >= 2]

    samples = np.concatenate([steered_samples(training_image(rng), pts) for _ in range(N_IMAGES)])
    bits = (samples[:, i1] < samples[:, i2]).astype(np.float64)
    mean = bits.mean(axis=0)
    centered = bits - mean
    norm = np.sqrt((centered**2).sum(axis=0)) + 1e-12
    order = np.argsort(np.abs(mean - 0.5), kind="stable")

    limit = 0.2
    while True:
        chosen: list[int] = []
        for c in order:
            if chosen:
                corr = centered[:, chosen].T @ centered[:, c] / (norm[chosen] * norm[c])
                if np.abs(corr).max() > limit:
                    continue
            chosen.append(int(c))
            if len(chosen) == N_TESTS:
                break
        if len(chosen) == N_TESTS:
            break
        limit += 0.05

    sel = [(*pts[i1[c]], *pts[i2[c]]) for c in chosen]
    print(f"# keypoints={len(samples)} corr_limit={limit:.2f} "
          f"mean|p-0.5|={np.abs(mean[chosen] - 0.5).mean():.3f}", file=sys.stderr)
    out = [
        '"""Fixed point-pair test pattern for the 256-bit binary descriptor.',
        "",
        "Each row is (x1, y1, x2, y2) relative to the keypoint; every point lies in a",
        "disk of radius 15 so rotated samples stay inside the 31x31 patch.",
        "Generated by tools/learn_brief_pattern.py.",
        '"""',
        "",
        "BRIEF_PATTERN = (",
    ]
    for k in range(0, N_TESTS, 4):
        out.append("    " + " ".join(f"({a}, {b}, {c}, {d})," for a, b, c, d in sel[k : k + 4]))
    out.append(")")
    print("\n".join(out))


if __name__ == "__main__":
    main()
