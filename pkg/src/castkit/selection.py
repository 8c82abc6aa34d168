"""Per-view difficulty scoring and view selection.

Each view gets ``score = l1 * mse + l2 * (1 - ssim) + l3 * perceptual``
(rendered vs edited). Views at or below ``tau`` are kept; if fewer than
``k_min`` survive, the ``k_min`` lowest-scoring views are kept instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import BoundsError, ConfigError, EmptyDatasetError
from .metrics import (
    PerceptualConfig,
    SsimParams,
    mse,
    perceptual_distance,
    psnr_from_mse,
    ssim,
)

AUTO_TAU_PERCENTILE = 60.0


@dataclass(frozen=True)
class ScoreWeights:
    """Score weights plus selection thresholds.

    ``tau`` is either a positive number or ``"auto"`` (the 60th percentile of
    the scores being selected from).
    """

    lambda1: float = 1.0
    lambda2: float = 0.4
    lambda3: float = 0.4
    tau: float | Literal["auto"] = "auto"
    k_min: int = 12

    def __post_init__(self):
        lams = (self.lambda1, self.lambda2, self.lambda3)
        if any(not (lam >= 0) for lam in lams) or sum(lams) <= 0:
            raise ConfigError(f"weights must be non-negative with positive sum, got {lams}")
        if self.tau != "auto":
            if isinstance(self.tau, str) or not (self.tau > 0):
                raise ConfigError(f"tau must be 'auto' or > 0, got {self.tau!r}")
        if int(self.k_min) != self.k_min or self.k_min < 1:
            raise ConfigError(f"k_min must be a positive integer, got {self.k_min!r}")


@dataclass(frozen=True)
class ViewScore:
    frame_index: int
    mse_term: float
    ssim_term: float
    perceptual_term: float
    score: float
    psnr_db: float

    def to_json(self) -> dict:
        return {
            "frame": self.frame_index,
            "mse": self.mse_term,
            "ssim_term": self.ssim_term,
            "perceptual": self.perceptual_term,
            "score": self.score,
            "psnr_db": None if math.isinf(self.psnr_db) else self.psnr_db,
        }


@dataclass(frozen=True)
class SelectionResult:
    selected: list[int]
    rule_applied: Literal["threshold", "top_k"]
    tau: float
    scores: list[ViewScore] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "rule": self.rule_applied,
            "tau": self.tau,
            "selected": list(self.selected),
            "scores": [s.to_json() for s in self.scores],
        }


def combine(w: ScoreWeights, mse_term: float, ssim_term: float, perceptual_term: float) -> float:
    return w.lambda1 * mse_term + w.lambda2 * ssim_term + w.lambda3 * perceptual_term


def score_view(
    rendered,
    edited,
    w: ScoreWeights = ScoreWeights(),
    ssim_p: SsimParams = SsimParams(),
    perc: PerceptualConfig = PerceptualConfig(),
    frame_index: int = 0,
) -> ViewScore:
    m = mse(rendered, edited)
    s = 1.0 - ssim(rendered, edited, ssim_p)
    p = perceptual_distance(rendered, edited, perc, frame=frame_index, ssim_params=ssim_p)
    return ViewScore(
        frame_index=frame_index,
        mse_term=m,
        ssim_term=s,
        perceptual_term=p,
        score=combine(w, m, s, p),
        psnr_db=psnr_from_mse(m, ssim_p.dynamic_range),
    )


def _score_array(scores: Sequence[ViewScore]) -> tuple[np.ndarray, np.ndarray]:
    if len(scores) == 0:
        raise EmptyDatasetError("no view scores to select from")
    idx = np.array([s.frame_index for s in scores], dtype=np.int64)
    val = np.array([s.score for s in scores], dtype=np.float64)
    return idx, val


def select_by_threshold(scores: Sequence[ViewScore], tau: float) -> list[int]:
    """Frame indices with ``score <= tau``, ascending."""
    idx, val = _score_array(scores)
    return sorted(int(i) for i in idx[val <= tau])


def select_top_k(scores: Sequence[ViewScore], k: int) -> list[int]:
    """The ``k`` lowest-scoring frame indices, ascending; ties go to the lower index."""
    idx, val = _score_array(scores)
    if not 1 <= k <= len(scores):
        raise BoundsError(f"k must be in [1, {len(scores)}], got {k}")
    order = np.lexsort((idx, val))
    return sorted(int(i) for i in idx[order[:k]])


def resolve_tau(scores: Sequence[ViewScore], tau: float | str) -> float:
    if tau == "auto":
        _, val = _score_array(scores)
        return float(np.percentile(val, AUTO_TAU_PERCENTILE))
    return float(tau)


def select_views(scores: Sequence[ViewScore], w: ScoreWeights = ScoreWeights()) -> SelectionResult:
    if len(scores) == 0:
        raise EmptyDatasetError("no view scores to select from")
    if w.k_min > len(scores):
        raise BoundsError(f"k_min={w.k_min} exceeds the number of views ({len(scores)})")
    tau = resolve_tau(scores, w.tau)
    selected = select_by_threshold(scores, tau)
    rule = "threshold"
    if len(selected) < w.k_min:
        selected = select_top_k(scores, w.k_min)
        rule = "top_k"
    table = sorted(scores, key=lambda s: s.frame_index)
    return SelectionResult(selected=selected, rule_applied=rule, tau=tau, scores=table)
