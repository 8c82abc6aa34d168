"""Readers and writers for point maps and camera files.

PMAP binary layout (little-endian)::

    b"PMAP" | u16 version (=1) | u32 width | u32 height | W*H*(f32 x, f32 y, f32 z)

A NaN triple marks an invalid pixel. Several records may be concatenated in
one file, one per frame.

ASCII PLY point maps carry ``x y z`` vertex properties and need a sidecar
``<stem>.pixels.json`` holding ``{"width": W, "height": H, "index": [...]}``
where ``index[k]`` is the row-major pixel index of vertex ``k``.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import CastkitError, ShapeError
from .geometry import CameraParams, PointMap

PMAP_MAGIC = b"PMAP"
PMAP_VERSION = 1
_HEADER = struct.Struct("<4sHII")


def encode_pmap(pm: PointMap) -> bytes:
    pts = pm.points.astype("<f4")
    pts[~pm.validity] = np.nan
    return _HEADER.pack(PMAP_MAGIC, PMAP_VERSION, pm.width, pm.height) + pts.tobytes()


def write_pmap(path: str | Path, pointmaps: PointMap | list[PointMap]) -> None:
    if isinstance(pointmaps, PointMap):
        pointmaps = [pointmaps]
    with open(path, "wb") as fh:
        for pm in pointmaps:
            fh.write(encode_pmap(pm))


def read_pmap(path: str | Path) -> list[PointMap]:
    """All point-map records stored in a PMAP file."""
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise CastkitError(f"cannot read point map {path}: {exc}") from exc
    out = []
    pos = 0
    while pos < len(buf):
        if len(buf) - pos < _HEADER.size:
            raise CastkitError(f"{path}: truncated PMAP header at byte {pos}")
        magic, version, w, h = _HEADER.unpack_from(buf, pos)
        if magic != PMAP_MAGIC:
            raise CastkitError(f"{path}: bad magic {magic!r} at byte {pos}")
        if version != PMAP_VERSION:
            raise CastkitError(f"{path}: unsupported PMAP version {version}")
        pos += _HEADER.size
        nbytes = w * h * 12
        if len(buf) - pos < nbytes:
            raise CastkitError(f"{path}: truncated PMAP payload ({w}x{h})")
        pts = np.frombuffer(buf, dtype="<f4", count=w * h * 3, offset=pos).reshape(h, w, 3)
        pos += nbytes
        out.append(PointMap.from_points(pts.astype(np.float64)))
    if not out:
        raise CastkitError(f"{path}: empty PMAP file")
    return out


def read_ply_pointmap(path: str | Path) -> PointMap:
    path = Path(path)
    sidecar = path.with_suffix(".pixels.json")
    try:
        lines = path.read_text(encoding="ascii").splitlines()
        side = json.loads(sidecar.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CastkitError(f"cannot read PLY point map {path}: {exc}") from exc
    if not lines or lines[0].strip() != "ply":
        raise CastkitError(f"{path}: not a PLY file")
    n_vertex, props, header_end = 0, [], None
    in_vertex = False
    for i, line in enumerate(lines[1:], start=1):
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "format" and tok[1] != "ascii":
            raise CastkitError(f"{path}: only ASCII PLY is supported")
        if tok[0] == "element":
            in_vertex = tok[1] == "vertex"
            if in_vertex:
                n_vertex = int(tok[2])
        elif tok[0] == "property" and in_vertex:
            props.append(tok[-1])
        elif tok[0] == "end_header":
            header_end = i
            break
    if header_end is None or not {"x", "y", "z"} <= set(props):
        raise CastkitError(f"{path}: PLY header lacks x/y/z vertex properties")
    cols = [props.index(c) for c in ("x", "y", "z")]
    body = lines[header_end + 1 : header_end + 1 + n_vertex]
    if len(body) != n_vertex:
        raise CastkitError(f"{path}: expected {n_vertex} vertices, found {len(body)}")
    xyz = np.array([[float(row.split()[c]) for c in cols] for row in body], dtype=np.float64).reshape(-1, 3)
    w, h = int(side["width"]), int(side["height"])
    index = np.asarray(side["index"], dtype=np.int64)
    if len(index) != n_vertex or (n_vertex and (index.min() < 0 or index.max() >= w * h)):
        raise ShapeError(f"{sidecar}: pixel index does not match {n_vertex} vertices in {w}x{h}")
    pts = np.full((h * w, 3), np.nan)
    pts[index] = xyz
    return PointMap.from_points(pts.reshape(h, w, 3))


def write_ply_pointmap(path: str | Path, pm: PointMap) -> None:
    path = Path(path)
    ys, xs = np.nonzero(pm.validity)
    pts = pm.points[ys, xs]
    header = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(pts)}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    body = [f"{x:.9g} {y:.9g} {z:.9g}" for x, y, z in pts]
    path.write_text("\n".join(header + body) + "\n", encoding="ascii")
    index = (ys * pm.width + xs).tolist()
    path.with_suffix(".pixels.json").write_text(
        json.dumps({"width": pm.width, "height": pm.height, "index": index}), encoding="utf-8"
    )


def load_pointmaps(source: str | Path) -> list[PointMap]:
    """Point maps from a PMAP file, or from a directory of ``.pmap``/``.ply`` files
    (one frame per file, lexicographic order)."""
    source = Path(source)
    if source.is_file():
        if source.suffix.lower() == ".ply":
            return [read_ply_pointmap(source)]
        return read_pmap(source)
    if not source.is_dir():
        raise CastkitError(f"point maps not found: {source}")
    files = sorted(
        (p for p in source.iterdir() if p.suffix.lower() in (".pmap", ".ply")),
        key=lambda p: p.name,
    )
    if not files:
        raise CastkitError(f"no .pmap or .ply files in {source}")
    out = []
    for f in files:
        out.extend([read_ply_pointmap(f)] if f.suffix.lower() == ".ply" else read_pmap(f))
    return out


def load_cameras(path: str | Path) -> list[CameraParams]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CastkitError(f"cannot read cameras {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise CastkitError(f"{path}: camera file must be a JSON array")
    return [CameraParams.from_json(d) for d in raw]


def save_cameras(path: str | Path, cams: list[CameraParams]) -> None:
    Path(path).write_text(json.dumps([c.to_json() for c in cams], indent=2), encoding="utf-8")
