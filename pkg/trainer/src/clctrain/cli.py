"""Command line front end: clctrain train | export-golden."""

import argparse
import logging
import sys
from pathlib import Path

from .errors import TrainerError
from .golden import export_golden
from .train import TrainConfig, evaluate_si_sdr_gain, train
from .weights_io import import_model


def cmd_train(args) -> int:
    config = TrainConfig(
        lr=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed,
        segment_seconds=args.segment_seconds,
        identity_start=not args.no_identity_start,
    )
    history = train(config, args.dataset, args.out)
    print(f"final loss {history[-1]:.6g} (started {history[0]:.6g})")
    if args.report_gain:
        model, settings = import_model(args.out)
        gain = evaluate_si_sdr_gain(model, args.dataset, settings)
        print(f"training-set SI-SDR gain {gain:.2f} dB")
    return 0


def cmd_export_golden(args) -> int:
    model, _ = import_model(args.model)
    shapes = export_golden(model, args.out, frames=args.frames, seed=args.seed)
    print(f"wrote {len(shapes)} stage files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clctrain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a paired noisy/clean dataset")
    p.add_argument("--dataset", type=Path, required=True, help="dir with noisy/, clean/, manifest.jsonl")
    p.add_argument("--out", type=Path, required=True, help="output .clcw path")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--segment-seconds", type=float, default=5.0)
    p.add_argument("--no-identity-start", action="store_true")
    p.add_argument("--report-gain", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export-golden", help="write golden activation vectors")
    p.add_argument("--model", type=Path, required=True, help=".clcw file to load")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--frames", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_export_golden)
    return parser


def run(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(run())
