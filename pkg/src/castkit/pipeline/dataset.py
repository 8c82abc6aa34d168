"""Frame directories and their companion resources."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CastkitError, ShapeError
from ..imageio import describe_shape, list_images, load_image


@dataclass(frozen=True)
class Dataset:
    """An ordered frame directory.

    Frames are the PNG files in ``root`` (or ``root/frames`` if present) in
    lexicographic filename order. Optional companions are looked up by
    conventional names: ``cameras.json``, ``pointmaps/``, ``masks/``,
    ``renders/``.
    """

    root: Path
    frames: tuple[Path, ...]
    cameras: Path | None = None
    pointmaps: Path | None = None
    masks: Path | None = None
    renders: Path | None = None

    @property
    def n(self) -> int:
        return len(self.frames)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.frames]

    @classmethod
    def open(cls, root: str | Path, min_frames: int = 2) -> "Dataset":
        root = Path(root)
        if not root.is_dir():
            raise CastkitError(f"dataset directory not found: {root}")
        frame_dir = root / "frames" if (root / "frames").is_dir() else root
        frames = tuple(list_images(frame_dir))
        names = [p.name for p in frames]
        assert names == sorted(names), "frames must be in lexicographic order"
        if len(frames) < min_frames:
            raise CastkitError(f"{root}: need at least {min_frames} frames, found {len(frames)}")

        def opt(name: str) -> Path | None:
            p = root / name
            return p if p.exists() else None

        return cls(root, frames, opt("cameras.json"), opt("pointmaps"), opt("masks"), opt("renders"))

    def load(self, i: int) -> np.ndarray:
        return load_image(self.frames[i])

    def check_uniform(self) -> tuple[int, ...]:
        """Load every frame and check they share one shape; returns it."""
        shape = None
        for i in range(self.n):
            img = self.load(i)
            if shape is None:
                shape = img.shape
            elif img.shape != shape:
                raise ShapeError(
                    f"frame {i} ({self.frames[i].name}) is {describe_shape(img)}, "
                    f"expected {describe_shape(np.empty(shape))}"
                )
        return shape


def pair_datasets(edited: Dataset, rendered: Dataset) -> None:
    """Edited and rendered frames correspond by sorted position."""
    if edited.n != rendered.n:
        k = min(edited.n, rendered.n)
        longer, name = (edited, "edited") if edited.n > rendered.n else (rendered, "rendered")
        raise CastkitError(
            f"frame count mismatch: {edited.n} edited vs {rendered.n} rendered; "
            f"frame {k} ({longer.frames[k].name}) in {name} has no counterpart"
        )
