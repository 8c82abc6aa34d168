"""``castkit`` command line.

Exit codes: 0 success, 1 internal failure, 2 usage or contract error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .. import formats
from .._parallel import parallel_map, resolve_workers
from ..errors import BoundsError, CastkitError, ConfigError
from ..geometry import lift_mask_pixels, propagate_added_object_masks
from ..imageio import check_same_shape, describe_shape, load_image, load_mask, save_image, save_mask
from ..masking import diff_mask, mask_bbox, mask_stats, MaskSequence
from ..matching import composite, consistency_report
from ..metrics import PerceptualConfig
from ..selection import score_view, select_views
from .config import PipelineConfig
from .dataset import Dataset, pair_datasets
from .manifest import StageOutputs, StageTimer, build_report, dumps

log = logging.getLogger("castkit")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


def _config(args) -> tuple[PipelineConfig, dict]:
    cfg, raw = PipelineConfig.load(args.config)
    return cfg, raw


def _out_dir(args, cfg: PipelineConfig) -> Path:
    return Path(args.out if args.out is not None else cfg.output_dir)


def cmd_maskdiff(args) -> int:
    cfg, _ = _config(args)
    cfg = cfg.replace("diff", threshold=args.threshold)
    timer = StageTimer()
    original = load_image(args.original)
    edited = load_image(args.edited)
    check_same_shape(original, edited)
    if args.mask is not None:
        mask = load_mask(args.mask)
        if mask.shape != original.shape[:2]:
            raise CastkitError(
                f"user mask is {mask.shape[1]}x{mask.shape[0]}, images are {describe_shape(original)}"
            )
        source = "user"
    else:
        mask = diff_mask(original, edited, cfg.diff)
        source = "auto"
    stats = mask_stats(MaskSequence([mask]))[0]
    del stats["frame"]
    out = StageOutputs(_out_dir(args, cfg))
    save_mask(out.path("first_mask.png"), mask)
    doc = {
        "inputs": {"original": Path(args.original).name, "edited": Path(args.edited).name},
        "source": source,
        "mask": "first_mask.png",
        "size": [int(mask.shape[1]), int(mask.shape[0])],
        "stats": _jsonable(stats),
        "params": cfg.to_dict()["diff"],
    }
    out.write_manifest("maskdiff", doc, cfg.section_hash(), timer)
    out.commit()
    log.info("mask area %.4f, %d components", stats["area_fraction"], stats["component_count"])
    return EXIT_OK


def cmd_propagate(args) -> int:
    cfg, _ = _config(args)
    cfg = cfg.replace("propagate", pad_fraction=args.pad_fraction, radius=args.radius)
    timer = StageTimer()
    first = load_mask(args.first_mask)
    pointmaps = formats.load_pointmaps(args.pointmaps)
    if len(pointmaps) != args.frames:
        raise CastkitError(f"--frames {args.frames} but {len(pointmaps)} point maps in {args.pointmaps}")
    cams = formats.load_cameras(args.cameras) if args.cameras else None
    if cams is not None and len(cams) != args.frames:
        raise CastkitError(f"--frames {args.frames} but {len(cams)} cameras in {args.cameras}")
    n_obj = len(lift_mask_pixels(pointmaps[0], first))
    seq = propagate_added_object_masks(first, pointmaps, cams, cfg.propagate, workers=args.workers)

    out = StageOutputs(_out_dir(args, cfg))
    mask_dir = out.path("masks")
    mask_dir.mkdir(parents=True, exist_ok=True)
    entries, listing = [], []
    for i, m in enumerate(seq.masks):
        name = f"masks/mask_{i:04d}.png"
        save_mask(mask_dir / Path(name).name, m)
        listing.append({"frame": i, "path": name})
        entries.append(
            {
                "frame": i,
                "path": name,
                "bbox": _jsonable(mask_bbox(m)),
                "area_fraction": float(np.count_nonzero(m) / m.size),
            }
        )
    out.path("masks.json").write_text(json.dumps(listing, indent=2) + "\n", encoding="utf-8")
    doc = {
        "mode": "camera" if cams is not None else "nearest",
        "frames": len(seq),
        "semantics": seq.semantics,
        "sequence": "masks.json",
        "masks": entries,
        "object_points": n_obj,
        "params": cfg.to_dict()["propagate"],
    }
    out.write_manifest("propagate", doc, cfg.section_hash(), timer)
    out.commit()
    return EXIT_OK


def _parse_tau(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tau must be 'auto' or a number, got {text!r}")


def cmd_select(args) -> int:
    cfg, raw = _config(args)
    if args.perceptual_table is not None:
        table = PerceptualConfig("external_table", cfg.perceptual.scales, args.perceptual_table)
        cfg = dataclasses.replace(cfg, perceptual=table)
    edited = Dataset.open(args.edited)
    rendered = Dataset.open(args.rendered)
    pair_datasets(edited, rendered)
    n = edited.n
    kmin_explicit = args.kmin is not None or "k_min" in raw.get("weights", {})
    k_min = args.kmin if args.kmin is not None else cfg.weights.k_min
    if k_min > n:
        if kmin_explicit:
            raise BoundsError(f"k_min={k_min} exceeds the number of frames ({n})")
        k_min = n
    cfg = cfg.replace("weights", tau=args.tau, k_min=k_min)
    timer = StageTimer()

    def score(i: int):
        a, b = rendered.load(i), edited.load(i)
        try:
            check_same_shape(a, b)
        except CastkitError as exc:
            raise CastkitError(
                f"frame {i} ({rendered.frames[i].name} vs {edited.frames[i].name}): {exc}"
            ) from exc
        return score_view(a, b, cfg.weights, cfg.ssim, cfg.perceptual, frame_index=i)

    scores = parallel_map(score, range(n), args.workers)
    result = select_views(scores, cfg.weights)

    out = StageOutputs(_out_dir(args, cfg))
    out.path("scores.txt").write_text(_score_table(result, edited.names), encoding="utf-8")
    doc = {
        **result.to_json(),
        "k_min": k_min,
        "frames": edited.names,
        "selected_frames": [edited.names[i] for i in result.selected],
        "cameras": Path(args.cameras).name if args.cameras else None,
        "params": {k: cfg.to_dict()[k] for k in ("weights", "ssim", "perceptual")},
    }
    out.write_manifest("select", doc, cfg.section_hash(), timer)
    out.commit()
    log.info("selected %d/%d views (%s rule, tau=%.6g)", len(result.selected), n, result.rule_applied, result.tau)
    return EXIT_OK


def _score_table(result, names: list[str]) -> str:
    chosen = set(result.selected)
    lines = [
        f"rule={result.rule_applied} tau={result.tau:.6g} selected={len(chosen)}/{len(names)}",
        f"{'frame':>5}  {'name':<24} {'mse':>10} {'1-ssim':>10} {'percept':>10} {'score':>10} {'psnr':>8}  sel",
    ]
    for s in result.scores:
        psnr = "inf" if s.psnr_db == float("inf") else f"{s.psnr_db:.2f}"
        lines.append(
            f"{s.frame_index:>5}  {names[s.frame_index]:<24} {s.mse_term:>10.6f} {s.ssim_term:>10.6f} "
            f"{s.perceptual_term:>10.6f} {s.score:>10.6f} {psnr:>8}  {'*' if s.frame_index in chosen else ''}"
        )
    return "\n".join(lines) + "\n"


def cmd_match(args) -> int:
    cfg, _ = _config(args)
    cfg = cfg.replace("match", max_distance=args.max_distance)
    timer = StageTimer()
    paths = [args.orig_a, args.orig_b, args.edit_a, args.edit_b]
    imgs = [load_image(p) for p in paths]
    report, results = consistency_report((imgs[0], imgs[1]), (imgs[2], imgs[3]), cfg.match)
    out = StageOutputs(_out_dir(args, cfg))
    comp_name = None
    if args.composite:
        comp_name = "matches.png"
        save_image(out.path(comp_name), composite((imgs[0], imgs[1]), (imgs[2], imgs[3]), results).astype(np.float64) / 255.0)
    doc = {
        **report,
        "inputs": {k: Path(p).name for k, p in zip(("orig_a", "orig_b", "edit_a", "edit_b"), paths)},
        "composite": comp_name,
    }
    out.write_manifest("match", doc, cfg.section_hash(), timer)
    out.commit()
    if report["degraded"]:
        log.warning("an image produced no usable keypoints; report fields are null")
    return EXIT_OK


def cmd_report(args) -> int:
    report = build_report(args.run)
    text = dumps(report)
    (Path(args.run) / "report.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config with per-stage sections")
    common.add_argument("--out", help="output directory (overrides config output_dir)")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $CASTKIT_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="castkit", description="Edit-consistency tooling for multi-view image sets.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("maskdiff", parents=[common], help="first-frame difference mask")
    s.add_argument("original")
    s.add_argument("edited")
    s.add_argument("--mask", help="user-supplied mask overriding the automatic one")
    s.add_argument("--threshold", type=float)
    s.set_defaults(func=cmd_maskdiff)

    s = sub.add_parser("propagate", parents=[common], help="propagate an added-object mask")
    s.add_argument("--first-mask", required=True)
    s.add_argument("--pointmaps", required=True, help="PMAP file or directory of .pmap/.ply")
    s.add_argument("--cameras", help="camera JSON; without it the nearest-point mode is used")
    s.add_argument("--frames", type=int, required=True)
    s.add_argument("--pad-fraction", type=float)
    s.add_argument("--radius", type=float)
    s.set_defaults(func=cmd_propagate)

    s = sub.add_parser("select", parents=[common], help="score and select views")
    s.add_argument("--edited", required=True)
    s.add_argument("--rendered", required=True)
    s.add_argument("--tau", type=_parse_tau)
    s.add_argument("--kmin", type=int)
    s.add_argument("--perceptual-table", help="JSON of precomputed per-frame perceptual distances")
    s.add_argument("--cameras", help="camera file referenced in the manifest for the reconstructor")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("match", parents=[common], help="keypoint-matching consistency report")
    s.add_argument("--orig-a", required=True)
    s.add_argument("--orig-b", required=True)
    s.add_argument("--edit-a", required=True)
    s.add_argument("--edit-b", required=True)
    s.add_argument("--max-distance", type=int)
    s.add_argument("--composite", action="store_true", help="also write matches.png")
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("report", help="merge stage manifests of a run directory")
    s.add_argument("--run", required=True)
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=cmd_report, workers=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        if args.workers is not None:
            args.workers = resolve_workers(args.workers)
        return args.func(args)
    except CastkitError as exc:
        print(f"castkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.debug("internal failure", exc_info=True)
        print(f"castkit {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
