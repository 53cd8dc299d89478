"""Command-line entry points: gen, encode, eval, loss-oracle."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .annotate import load_boundary_png, load_junctions
from .codec import GJT_MAGIC, encode, read_gjt, write_gjt
from .dataset import generate_dataset, manifest_hash
from .losses import LossReport, boundary_loss, detection_loss, junction_loss, total_visual_loss
from .metrics import Detection, boundary_f1, junction_score, mean_average_precision
from .shapes import GenConfig


def _err(msg: str) -> int:
    print(f"geoforge: error: {msg}", file=sys.stderr)
    return 1


def _load_tensor(path: str) -> np.ndarray:
    """GJT1, .npy, or grayscale PNG, by sniffing the file header."""
    with Path(path).open("rb") as f:
        head = f.read(8)
    if head[:4] == GJT_MAGIC:
        return read_gjt(path)
    if head[:6] == b"\x93NUMPY":
        return np.load(path)
    if head[:8] == b"\x89PNG\r\n\x1a\n":
        return load_boundary_png(path)
    raise ValueError(f"{path}: unrecognized tensor file (expected GJT1, .npy, or PNG)")


def _print_report(report: LossReport, as_json: bool) -> None:
    if as_json:
        print(json.dumps({"total": report.total, **report.components}, sort_keys=True))
    else:
        for name, value in report.components.items():
            print(f"{name} {value!r}")
        print(f"total {report.total!r}")


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def _cmd_gen(args) -> int:
    # Flag defaults live here so an explicit flag can override a --config file.
    base = {
        "count": None,
        "canvas_size": (1000, 1000),
        "shapes_min": 2,
        "shapes_max": 8,
        "text_prob": 0.7,
        "class_weights": (1.0,) * 6,
        "master_seed": 0,
    }
    if args.config:
        base.update(json.loads(Path(args.config).read_text()))
    if args.count is not None:
        base["count"] = args.count
    if args.seed is not None:
        base["master_seed"] = args.seed
    if args.canvas is not None:
        base["canvas_size"] = (args.canvas, args.canvas)
    if args.text_prob is not None:
        base["text_prob"] = args.text_prob
    if args.shapes_min is not None:
        base["shapes_min"] = args.shapes_min
    if args.shapes_max is not None:
        base["shapes_max"] = args.shapes_max
    if base["count"] is None:
        raise ValueError("--count is required (flag or config file)")
    base["canvas_size"] = tuple(base["canvas_size"])
    base["class_weights"] = tuple(base["class_weights"])
    config = GenConfig(**base)
    generate_dataset(
        config, args.out, workers=args.workers, stroke=args.stroke, sigma=args.sigma
    )
    print(f"manifest_sha256 {manifest_hash(args.out)}")
    return 0


# ---------------------------------------------------------------------------
# encode
# ---------------------------------------------------------------------------


def _cmd_encode(args) -> int:
    junctions = load_junctions(args.junctions)
    W, H = args.canvas
    write_gjt(args.out, encode(junctions, (W, H)))
    print(f"encoded {len(junctions)} junctions -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def _coco_gt_detections(doc: dict) -> list[Detection]:
    return [
        Detection(a["image_id"], a["category_id"], tuple(a["bbox"]))
        for a in doc["annotations"]
    ]


def _paired_files(pred: Path, gt: Path) -> list[tuple[Path, Path]]:
    """A file pair as-is, or directory pairs matched by file name."""
    if pred.is_dir() != gt.is_dir():
        raise ValueError("--pred and --gt must both be files or both be directories")
    if not pred.is_dir():
        return [(pred, gt)]
    pairs = []
    for g in sorted(gt.iterdir()):
        p = pred / g.name
        if p.exists():
            pairs.append((p, g))
    if not pairs:
        raise ValueError("no matching file names between the two directories")
    return pairs


def _cmd_eval(args) -> int:
    report: dict
    if args.task == "det":
        preds_doc = json.loads(Path(args.pred).read_text())
        gt_doc = json.loads(Path(args.gt).read_text())
        preds = [
            Detection(p["image_id"], p["category_id"], tuple(p["bbox"]), p.get("score", 1.0))
            for p in preds_doc
        ]
        res = mean_average_precision(preds, _coco_gt_detections(gt_doc), iou_thr=args.iou_thr)
        report = {"task": "det", "iou_thr": args.iou_thr, "map": res.map,
                  "ap_per_class": {str(k): v for k, v in res.per_class.items()}}
        print(f"mAP@{args.iou_thr} {res.map:.6f}")
        for cls, ap in sorted(res.per_class.items()):
            print(f"AP class {cls} {ap:.6f}")
    elif args.task == "junction":
        pairs = _paired_files(Path(args.pred), Path(args.gt))
        scores = []
        for p, g in pairs:
            gt_j = load_junctions(g)
            d_tol = args.d_tol
            if d_tol is None:
                W, H = args.canvas
                d_tol = 0.01 * float(np.hypot(W, H))
            scores.append(junction_score(load_junctions(p), gt_j, d_tol, args.ang_tol))
        report = {
            "task": "junction",
            "files": len(pairs),
            "precision": float(np.mean([s.precision for s in scores])),
            "recall": float(np.mean([s.recall for s in scores])),
            "f1": float(np.mean([s.f1 for s in scores])),
            "branch_accuracy": float(np.mean([s.branch_accuracy for s in scores])),
        }
        for k in ("precision", "recall", "f1", "branch_accuracy"):
            print(f"{k} {report[k]:.6f}")
    else:  # boundary
        pairs = _paired_files(Path(args.pred), Path(args.gt))
        f1s = [
            boundary_f1(_load_tensor(str(p)), _load_tensor(str(g)),
                        bin_thr=args.bin_thr, match_tol=args.match_tol)
            for p, g in pairs
        ]
        report = {"task": "boundary", "files": len(pairs), "f1": float(np.mean(f1s))}
        print(f"f1 {report['f1']:.6f}")

    if args.json_out:
        Path(args.json_out).write_text(json.dumps(report, sort_keys=True, indent=2))
    return 0


# ---------------------------------------------------------------------------
# loss-oracle
# ---------------------------------------------------------------------------

_DET_PRED_KEYS = ("rpn_scores", "rpn_deltas", "cls_scores", "box_deltas")
_DET_TARGET_KEYS = ("rpn_labels", "rpn_delta_targets", "cls_labels", "box_delta_targets")


def _det_report(pred_npz, target_npz) -> LossReport:
    for k in _DET_PRED_KEYS:
        if k not in pred_npz:
            raise ValueError(f"pred file missing array {k!r}")
    for k in _DET_TARGET_KEYS:
        if k not in target_npz:
            raise ValueError(f"target file missing array {k!r}")
    return detection_loss(
        pred_npz["rpn_scores"],
        target_npz["rpn_labels"],
        pred_npz["rpn_deltas"],
        target_npz["rpn_delta_targets"],
        pred_npz["cls_scores"],
        target_npz["cls_labels"],
        pred_npz["box_deltas"],
        target_npz["box_delta_targets"],
    )


def _cmd_loss_oracle(args) -> int:
    if args.task == "junction":
        report = junction_loss(_load_tensor(args.pred), _load_tensor(args.target))
    elif args.task == "boundary":
        value = boundary_loss(_load_tensor(args.pred), _load_tensor(args.target))
        report = LossReport(total=value, components={"l_bodr": value})
    elif args.task == "det":
        report = _det_report(np.load(args.pred), np.load(args.target))
    else:  # vis: npz bundles; absent groups contribute 0
        pred_npz = np.load(args.pred)
        target_npz = np.load(args.target)
        l_det = l_junc = l_bodr = 0.0
        components: dict[str, float] = {}
        if all(k in pred_npz for k in _DET_PRED_KEYS):
            det = _det_report(pred_npz, target_npz)
            l_det = det.total
            components.update(det.components)
        if "junction" in pred_npz and "junction" in target_npz:
            jr = junction_loss(pred_npz["junction"], target_npz["junction"])
            l_junc = jr.total
            components.update(jr.components)
        if "boundary" in pred_npz and "boundary" in target_npz:
            l_bodr = boundary_loss(pred_npz["boundary"], target_npz["boundary"])
            components["l_bodr"] = l_bodr
        total = total_visual_loss(l_det, l_junc, l_bodr)
        components["l_vis"] = total
        report = LossReport(total=total, components=components)
    _print_report(report, args.json)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geoforge")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--config", default=None,
                   help="JSON file with generation keys (flags override it)")
    g.add_argument("--count", type=int, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--canvas", type=int, default=None)
    g.add_argument("--text-prob", type=float, default=None)
    g.add_argument("--shapes-min", type=int, default=None)
    g.add_argument("--shapes-max", type=int, default=None)
    g.add_argument("--stroke", type=int, default=2)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--workers", type=int, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    e = sub.add_parser("encode", help="encode a junction JSON file into a GJT1 target")
    e.add_argument("--junctions", required=True)
    e.add_argument("--canvas", type=int, nargs=2, metavar=("W", "H"), required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=_cmd_encode)

    v = sub.add_parser("eval", help="evaluate predictions against ground truth")
    v.add_argument("--task", choices=("det", "junction", "boundary"), required=True)
    v.add_argument("--pred", required=True)
    v.add_argument("--gt", required=True)
    v.add_argument("--iou-thr", type=float, default=0.5)
    v.add_argument("--d-tol", type=float, default=None,
                   help="junction match distance; default 0.01 * canvas diagonal")
    v.add_argument("--ang-tol", type=float, default=12.0)
    v.add_argument("--canvas", type=int, nargs=2, metavar=("W", "H"), default=(1000, 1000))
    v.add_argument("--bin-thr", type=float, default=0.5)
    v.add_argument("--match-tol", type=float, default=2.0)
    v.add_argument("--json-out", default=None)
    v.set_defaults(func=_cmd_eval)

    o = sub.add_parser("loss-oracle", help="compute reference losses from tensor files")
    o.add_argument("--task", choices=("junction", "boundary", "det", "vis"), required=True)
    o.add_argument("--pred", required=True)
    o.add_argument("--target", required=True)
    o.add_argument("--json", action="store_true")
    o.set_defaults(func=_cmd_loss_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface a clean diagnostic, nonzero exit
        return _err(str(exc))


if __name__ == "__main__":
    sys.exit(main())
