"""Deterministic tooling around a first-frame-guided 3D scene editing pipeline.

View scoring and selection, first-frame difference masks, added-object mask
propagation through point maps, and keypoint-matching consistency reports.
"""

__version__ = "0.1.0"
