"""Synthetic scenes and images for tests."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from castkit.geometry import CameraParams, PointMap


def texture(rng, h, w, channels=1):
    """Smooth multi-scale noise with some hard-edged rectangles, in [0.05, 0.95]."""
    shape = (h, w)
    img = np.zeros(shape)
    for sigma, amp in ((12, 1.0), (4, 0.6), (1.5, 0.4)):
        layer = gaussian_filter(rng.standard_normal(shape), sigma)
        img += amp * layer / (layer.std() + 1e-12)
    for _ in range(max(4, h * w // 4000)):
        y0, x0 = rng.integers(0, h - 8), rng.integers(0, w - 8)
        hh, ww = rng.integers(6, max(7, h // 6)), rng.integers(6, max(7, w // 6))
        img[y0 : y0 + hh, x0 : x0 + ww] += rng.uniform(-2, 2)
    img = (img - img.min()) / (img.max() - img.min())
    img = 0.05 + 0.9 * img
    if channels == 3:
        tint = rng.uniform(0.8, 1.0, size=3)
        img = np.clip(img[:, :, None] * tint[None, None, :], 0, 1)
    return img


def look_at(eye, target, w, h, f, up=(0.0, -1.0, 0.0)) -> CameraParams:
    """Camera at ``eye`` looking at ``target``; camera axes x right, y down, z forward."""
    eye = np.asarray(eye, float)
    z = np.asarray(target, float) - eye
    z /= np.linalg.norm(z)
    x = np.cross(z, np.asarray(up, float))
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    R = np.stack([x, y, z])
    return CameraParams(f, f, w / 2 - 0.5, h / 2 - 0.5, R, -R @ eye, w, h)


def orbit_cameras(n, w, h, f, radius=4.0, elevation_deg=25.0, arc_deg=80.0, target=(0, 0, 0)):
    """``n`` cameras on an arc around the +z axis, above the target (world y is down)."""
    cams = []
    el = np.deg2rad(elevation_deg)
    for az in np.deg2rad(np.linspace(-arc_deg / 2, arc_deg / 2, n)):
        eye = radius * np.array([np.cos(el) * np.sin(az), -np.sin(el), np.cos(el) * np.cos(az)])
        cams.append(look_at(eye + np.asarray(target, float), target, w, h, f))
    return cams


def pixel_rays(cam: CameraParams):
    ys, xs = np.mgrid[0 : cam.height, 0 : cam.width].astype(float)
    d_cam = np.stack([(xs - cam.cx) / cam.fx, (ys - cam.cy) / cam.fy, np.ones_like(xs)], axis=-1)
    d = d_cam @ cam.rotation  # camera -> world direction (R^T d)
    return cam.center, d


class BoxScene:
    """An oriented cube floating in front of a back wall at z = ``wall_z``."""

    def __init__(self, center=(0, 0, 0), half=0.5, yaw_deg=45.0, wall_z=-3.0, with_cube=True):
        self.center = np.asarray(center, float)
        self.half = half
        a = np.deg2rad(yaw_deg)
        self.R = np.array([[np.cos(a), 0, np.sin(a)], [0, 1, 0], [-np.sin(a), 0, np.cos(a)]])
        self.wall_z = wall_z
        self.with_cube = with_cube

    def vertices(self):
        s = self.half
        corners = np.array([[x, y, z] for x in (-s, s) for y in (-s, s) for z in (-s, s)])
        return corners @ self.R.T + self.center

    def cube_hit(self, origin, d):
        """Ray parameter of the first cube intersection (inf if none)."""
        o = (origin - self.center) @ self.R
        dl = d @ self.R
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / dl
            t1 = (-self.half - o) * inv
            t2 = (self.half - o) * inv
        tmin = np.nanmax(np.minimum(t1, t2), axis=-1)
        tmax = np.nanmin(np.maximum(t1, t2), axis=-1)
        hit = (tmax >= tmin) & (tmax > 0)
        return np.where(hit, np.where(tmin > 0, tmin, tmax), np.inf)

    def render(self, cam: CameraParams):
        """(PointMap, cube mask) seen from ``cam`` (pixel centers)."""
        origin, d = pixel_rays(cam)
        t_cube = self.cube_hit(origin, d) if self.with_cube else np.full(d.shape[:2], np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_wall = (self.wall_z - origin[2]) / d[..., 2]
        t_wall = np.where(t_wall > 0, t_wall, np.inf)
        t = np.minimum(t_cube, t_wall)
        cube = np.isfinite(t_cube) & (t_cube <= t_wall)
        pts = origin + t[..., None] * d
        pts[~np.isfinite(t)] = np.nan
        return PointMap.from_points(pts), cube


def blur(img, sigma):
    if img.ndim == 3:
        return np.stack([gaussian_filter(img[..., c], sigma) for c in range(img.shape[2])], axis=-1)
    return gaussian_filter(img, sigma)


def write_run_fixture(root, n=10, h=120, w=160, corrupted=(), seed=0, pmap_layout="dir"):
    """Write a complete synthetic dataset under ``root`` and return its paths.

    Original views are horizontally sliding crops of one texture; the edit adds
    a bright cube (the same cube the orbit point maps contain) to every view.
    Rendered views are the edited views plus light noise, except the
    ``corrupted`` frames, which are heavily blurred.
    """
    from pathlib import Path

    from castkit import formats
    from castkit.imageio import save_image

    root = Path(root)
    rng = np.random.default_rng(seed)
    step = 3
    big = texture(rng, h, w + step * n, channels=3)
    cams = orbit_cameras(n, w, h, f=0.9 * w)
    scene = BoxScene()
    rendered_scene = [scene.render(c) for c in cams]

    dirs = {k: root / k for k in ("original", "edited", "rendered", "pointmaps")}
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)
    color = np.array([0.95, 0.85, 0.2])
    for i in range(n):
        orig = big[:, i * step : i * step + w]
        cube = rendered_scene[i][1]
        shade = 0.75 + 0.25 * texture(rng, h, w)[..., None]
        edited = orig.copy()
        edited[cube] = (color * shade)[cube]
        noise = rng.normal(0, 0.01, edited.shape)
        rendered = blur(edited, 3.0) if i in corrupted else np.clip(edited + noise, 0, 1)
        save_image(dirs["original"] / f"frame_{i:04d}.png", orig)
        save_image(dirs["edited"] / f"frame_{i:04d}.png", edited)
        save_image(dirs["rendered"] / f"frame_{i:04d}.png", rendered)
    pms = [r[0] for r in rendered_scene]
    if pmap_layout == "dir":
        for i, pm in enumerate(pms):
            formats.write_pmap(dirs["pointmaps"] / f"frame_{i:04d}.pmap", pm)
        pointmaps = dirs["pointmaps"]
    else:
        pointmaps = root / "pointmaps.pmap"
        formats.write_pmap(pointmaps, pms)
    formats.save_cameras(root / "cameras.json", cams)
    return {
        **dirs,
        "pointmaps": pointmaps,
        "cameras": root / "cameras.json",
        "cube_masks": [r[1] for r in rendered_scene],
        "n": n,
    }
