"""Strict JSON configuration with one section per stage."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..geometry import PropagationConfig
from ..masking import DiffConfig
from ..matching import MatchConfig
from ..metrics import PerceptualConfig, SsimParams
from ..selection import ScoreWeights

SECTIONS = {
    "weights": ScoreWeights,
    "ssim": SsimParams,
    "perceptual": PerceptualConfig,
    "diff": DiffConfig,
    "propagate": PropagationConfig,
    "match": MatchConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    weights: ScoreWeights = field(default_factory=ScoreWeights)
    ssim: SsimParams = field(default_factory=SsimParams)
    perceptual: PerceptualConfig = field(default_factory=PerceptualConfig)
    diff: DiffConfig = field(default_factory=DiffConfig)
    propagate: PropagationConfig = field(default_factory=PropagationConfig)
    match: MatchConfig = field(default_factory=MatchConfig)
    output_dir: str = "."

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - set(SECTIONS) - {"output_dir"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for name, typ in SECTIONS.items():
            section = raw.get(name, {})
            if not isinstance(section, dict):
                raise ConfigError(f"config section {name!r} must be an object")
            allowed = {f.name for f in dataclasses.fields(typ)}
            bad = set(section) - allowed
            if bad:
                raise ConfigError(f"unknown keys in {name!r}: {sorted(bad)}")
            try:
                kwargs[name] = typ(**section)
            except TypeError as exc:
                raise ConfigError(f"bad {name!r} section: {exc}") from exc
        if "output_dir" in raw:
            kwargs["output_dir"] = str(raw["output_dir"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path | None) -> tuple["PipelineConfig", dict]:
        """Config from a JSON file (defaults when ``path`` is None) plus the raw dict."""
        if path is None:
            return cls(), {}
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw), raw

    def replace(self, section: str, **changes) -> "PipelineConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **changes)})

    def to_dict(self) -> dict:
        """Every section except ``output_dir``, which does not affect results."""
        return {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}

    def section_hash(self, *names: str) -> str:
        d = self.to_dict()
        payload = {n: d[n] for n in (names or SECTIONS)}
        return canonical_hash(payload)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_hash(obj) -> str:
    return "sha256:" + hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
