"""Stage manifests: schemas, hashing, and crash-safe writing.

Outputs are first written with a ``.partial`` suffix and renamed only when
the stage finishes, so a failed stage leaves its partial outputs marked.
The ``timing`` field is kept out of ``content_hash``.
"""

from __future__ import annotations

import json
import os
import shutil
import time
from datetime import datetime, timezone
from pathlib import Path

import jsonschema

from ..errors import ManifestError
from .config import canonical_hash

SCHEMA_VERSION = 1
PARTIAL = ".partial"
STAGES = ("maskdiff", "propagate", "select", "match")

_num = {"type": "number"}
_int = {"type": "integer"}
_nullable_num = {"type": ["number", "null"]}
_bbox = {
    "oneOf": [
        {"type": "null"},
        {"type": "array", "items": _int, "minItems": 4, "maxItems": 4},
    ]
}
_hash = {"type": "string", "pattern": "^sha256:[0-9a-f]{64}$"}
_timing = {
    "type": "object",
    "properties": {"started_at": {"type": "string"}, "elapsed_s": _num},
    "required": ["started_at", "elapsed_s"],
}


def _stage_schema(stage: str, properties: dict, required: list[str]) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "stage": {"const": stage},
            "config_hash": _hash,
            "content_hash": _hash,
            "timing": _timing,
            **properties,
        },
        "required": ["schema_version", "stage", "config_hash", "content_hash", "timing", *required],
    }


_stats = {
    "type": "object",
    "properties": {
        "area_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "component_count": {"type": "integer", "minimum": 0},
        "bbox": _bbox,
    },
    "required": ["area_fraction", "component_count", "bbox"],
}

SCHEMAS = {
    "maskdiff": _stage_schema(
        "maskdiff",
        {
            "inputs": {"type": "object"},
            "source": {"enum": ["auto", "user"]},
            "mask": {"type": "string"},
            "size": {"type": "array", "items": _int, "minItems": 2, "maxItems": 2},
            "stats": _stats,
            "params": {"type": "object"},
        },
        ["inputs", "source", "mask", "size", "stats", "params"],
    ),
    "propagate": _stage_schema(
        "propagate",
        {
            "mode": {"enum": ["camera", "nearest"]},
            "frames": {"type": "integer", "minimum": 1},
            "semantics": {"enum": ["edit_region", "validity"]},
            "sequence": {"type": "string"},
            "masks": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "frame": _int,
                        "path": {"type": "string"},
                        "bbox": _bbox,
                        "area_fraction": _num,
                    },
                    "required": ["frame", "path", "bbox", "area_fraction"],
                },
            },
            "object_points": {"type": "integer", "minimum": 1},
            "params": {"type": "object"},
        },
        ["mode", "frames", "semantics", "sequence", "masks", "object_points", "params"],
    ),
    "select": _stage_schema(
        "select",
        {
            "rule": {"enum": ["threshold", "top_k"]},
            "tau": _num,
            "k_min": {"type": "integer", "minimum": 1},
            "selected": {"type": "array", "items": _int, "uniqueItems": True},
            "selected_frames": {"type": "array", "items": {"type": "string"}},
            "scores": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "frame": _int,
                        "mse": _num,
                        "ssim_term": _num,
                        "perceptual": _num,
                        "score": _num,
                        "psnr_db": _nullable_num,
                    },
                    "required": ["frame", "mse", "ssim_term", "perceptual", "score", "psnr_db"],
                },
            },
            "frames": {"type": "array", "items": {"type": "string"}},
            "cameras": {"type": ["string", "null"]},
            "params": {"type": "object"},
        },
        ["rule", "tau", "selected", "scores", "frames"],
    ),
    "match": _stage_schema(
        "match",
        {
            "original_matches": {"type": ["integer", "null"]},
            "edited_matches": {"type": ["integer", "null"]},
            "ratio": _nullable_num,
            "degraded": {"type": "boolean"},
            "keypoints": {"type": "object"},
            "inputs": {"type": "object"},
            "composite": {"type": ["string", "null"]},
            "params": {"type": "object"},
        },
        ["original_matches", "edited_matches", "ratio", "degraded", "params"],
    ),
}

SCHEMAS["report"] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "stages": {
            "type": "object",
            "properties": {s: SCHEMAS[s] for s in STAGES},
            "additionalProperties": False,
            "minProperties": 1,
        },
        "config_hashes": {"type": "object", "additionalProperties": _hash},
        "timings": {"type": "object", "additionalProperties": _timing},
        "content_hash": _hash,
    },
    "required": ["schema_version", "stages", "config_hashes", "timings", "content_hash"],
}


def validate(kind: str, doc: dict, source: str | Path | None = None) -> None:
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        where = f"{source}: " if source else ""
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ManifestError(f"{where}{kind} manifest invalid at '{path}': {exc.message}") from exc


def content_hash(doc: dict) -> str:
    return canonical_hash({k: v for k, v in doc.items() if k not in ("timing", "content_hash")})


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def manifest_name(stage: str) -> str:
    return f"{stage}.json"


class StageTimer:
    def __init__(self):
        self.started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self._t0 = time.perf_counter()

    def timing(self) -> dict:
        return {"started_at": self.started_at, "elapsed_s": round(time.perf_counter() - self._t0, 6)}


class StageOutputs:
    """Collects a stage's output paths; every path is written as ``<name>.partial``.

    :meth:`commit` renames them to their final names. If the stage raises
    before committing, the ``.partial`` files stay behind.
    """

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._pending: list[Path] = []

    def path(self, name: str) -> Path:
        final = self.out_dir / name
        tmp = final.with_name(final.name + PARTIAL)
        self._pending.append(final)
        return tmp

    def write_manifest(self, stage: str, doc: dict, config_hash: str, timer: StageTimer) -> Path:
        doc = {"schema_version": SCHEMA_VERSION, "stage": stage, "config_hash": config_hash, **doc}
        doc["content_hash"] = content_hash(doc)
        doc["timing"] = timer.timing()
        validate(stage, doc)
        tmp = self.path(manifest_name(stage))
        tmp.write_text(dumps(doc), encoding="utf-8")
        return tmp

    def commit(self) -> None:
        for final in self._pending:
            tmp = final.with_name(final.name + PARTIAL)
            if final.is_dir() and tmp.is_dir():
                shutil.rmtree(final)
            os.replace(tmp, final)
        self._pending.clear()


def read_manifest(path: str | Path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: corrupt manifest ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("stage") not in SCHEMAS:
        raise ManifestError(f"{path}: not a stage manifest")
    validate(doc["stage"], doc, path)
    if doc["content_hash"] != content_hash(doc):
        raise ManifestError(f"{path}: content hash mismatch")
    return doc


def build_report(run_dir: str | Path) -> dict:
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ManifestError(f"run directory not found: {run_dir}")
    stages, hashes, timings = {}, {}, {}
    for stage in STAGES:
        path = run_dir / manifest_name(stage)
        if not path.exists():
            continue
        doc = read_manifest(path)
        if doc["stage"] != stage:
            raise ManifestError(f"{path}: manifest is for stage {doc['stage']!r}")
        stages[stage] = doc
        hashes[stage] = doc["config_hash"]
        timings[stage] = doc["timing"]
    if not stages:
        raise ManifestError(f"no stage manifests in {run_dir}")
    report = {
        "schema_version": SCHEMA_VERSION,
        "stages": stages,
        "config_hashes": hashes,
        "timings": timings,
    }
    report["content_hash"] = canonical_hash(
        {s: d["content_hash"] for s, d in stages.items()}
    )
    validate("report", report, run_dir)
    return report
