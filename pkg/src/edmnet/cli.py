"""Command-line entry point: ``edmnet <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import EdmnetError, PreconditionError
from .pipeline import STAGES, PipelineConfig, coerce, read_config_file, run_pipeline, run_stage
from .synth import ANGLE_LAWS, SyntheticSpec, fixture_files, sample_mrv

# flag name -> PipelineConfig field
FLAGS = {
    "prices": str,
    "prices-next": str,
    "index": str,
    "tail-quantile": float,
    "theta": float,
    "alpha": float,
    "q": float,
    "cap": float,
    "min-return": float,
    "interval": int,
    "seed": int,
    "out": str,
}


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("pipeline options")
    for flag, kind in FLAGS.items():
        g.add_argument(f"--{flag}", type=kind, default=None)
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edmnet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"edmnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    sub.add_parser("run", parents=[common], help="full pipeline plus manifest")
    for name in STAGES:
        sub.add_parser(name, parents=[common], help=f"run the {name} stage only")

    synth = sub.add_parser("synth", parents=[common], help="dump a synthetic sample as z1,z2 CSV")
    synth.add_argument("--law", choices=ANGLE_LAWS, default="uniform")
    synth.add_argument("--tail-index", type=float, default=2.0)
    synth.add_argument("--count", type=int, default=1000)

    sub.add_parser("fixture", parents=[common], help="write the synthetic fixture CSVs")
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    values = read_config_file(args.config) if args.config else {}
    for flag in FLAGS:
        raw = getattr(args, flag.replace("-", "_"))
        if raw is not None:
            key, v = coerce(flag, raw)
            values[key] = v
    return PipelineConfig(**values)


def _synth(args, cfg: PipelineConfig) -> None:
    batch = sample_mrv(SyntheticSpec(args.tail_index, angle_law=args.law, seed=cfg.seed), args.count)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "synth.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z1", "z2"])
        w.writerows((repr(float(a)), repr(float(b))) for a, b in batch.pairs)


def _fixture(cfg: PipelineConfig) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in fixture_files(cfg.seed).items():
        (out / name).write_text(text)


def dispatch(args: argparse.Namespace) -> None:
    cfg = resolve_config(args)
    if args.command == "run":
        run_pipeline(cfg)
    elif args.command == "synth":
        _synth(args, cfg)
    elif args.command == "fixture":
        _fixture(cfg)
    elif args.command == "edm" and cfg.prices is not None:
        run_stage("returns", cfg)
        run_stage("edm", cfg)
    else:
        run_stage(args.command, cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        dispatch(args)
    except EdmnetError as exc:
        print(f"edmnet {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (KeyError, OSError) as exc:
        # Bad ticker references or unreadable paths are caller errors.
        print(f"edmnet {args.command}: error: {exc}", file=sys.stderr)
        return PreconditionError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
