"""Command-line entry points: train, eval, gradcheck, ablate, parity."""

from __future__ import annotations

import argparse
import json
import sys

from .ablate import run_ablation, write_report
from .data import GeoforgeDataset
from .gradcheck import check_boundary_loss, check_junction_loss
from .oracle import parity_check
from .train import TrainConfig, evaluate, load_model, make_model, save_model, train


def _cmd_train(args) -> int:
    config = TrainConfig(
        epochs=args.epochs, batch_size=args.batch, lr=args.lr, seed=args.seed,
        cell_thr=args.cell_thr,
    )
    model = make_model(seed=args.seed)
    train_ds = GeoforgeDataset(args.data)
    val_ds = GeoforgeDataset(args.val_data) if args.val_data else None
    trace = train(model, train_ds, config, val_ds, trace_path=args.trace)
    if args.out:
        save_model(model, args.out)
    for row in trace:
        if row.get("kind") == "epoch":
            print(json.dumps(row))
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    metrics = evaluate(model, GeoforgeDataset(args.data), args.cell_thr)
    print(json.dumps(metrics, sort_keys=True))
    return 0


def _cmd_gradcheck(args) -> int:
    jerr = check_junction_loss(seed=args.seed)
    berr = check_boundary_loss(seed=args.seed)
    print(f"junction_loss max rel err {jerr:.3e} (threshold 1e-4)")
    print(f"boundary_loss max rel err {berr:.3e} (threshold 1e-6)")
    return 0 if jerr < 1e-4 and berr < 1e-6 else 1


def _cmd_ablate(args) -> int:
    model = load_model(args.model)
    report = run_ablation(
        model, GeoforgeDataset(args.data), seed=args.seed, cell_thr=args.cell_thr
    )
    if args.out:
        write_report(report, args.out)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _cmd_parity(args) -> int:
    result = parity_check(args.out_dir, pairs=args.pairs, seed=args.seed)
    print(json.dumps(result, sort_keys=True))
    ok = (
        result["worst_junction_rel_err"] < 1e-5
        and result["worst_boundary_rel_err"] < 1e-5
    )
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geotrainer")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train the toy model on a geoforge dataset")
    t.add_argument("--data", required=True)
    t.add_argument("--val-data", default=None)
    t.add_argument("--epochs", type=int, default=3)
    t.add_argument("--batch", type=int, default=8)
    t.add_argument("--lr", type=float, default=2e-3)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--cell-thr", type=float, default=0.35)
    t.add_argument("--out", default=None, help="write model weights here")
    t.add_argument("--trace", default=None, help="write JSONL metrics trace here")
    t.set_defaults(func=_cmd_train)

    e = sub.add_parser("eval", help="evaluate a trained model")
    e.add_argument("--data", required=True)
    e.add_argument("--model", required=True)
    e.add_argument("--cell-thr", type=float, default=0.35)
    e.set_defaults(func=_cmd_eval)

    g = sub.add_parser("gradcheck", help="finite-difference gradient validation")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_gradcheck)

    a = sub.add_parser("ablate", help="router ablation over 6 configurations")
    a.add_argument("--data", required=True)
    a.add_argument("--model", required=True)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--cell-thr", type=float, default=0.35)
    a.add_argument("--out", default=None)
    a.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("parity", help="loss parity against the geoforge loss-oracle")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_parity)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"geotrainer: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
