"""
Command-line entry point for the similarity prototype toolkit.

    python simproto.py [--config run.toml] [--seed N] [--out DIR] [--quiet] <command> [path] [--section.key value ...]
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple
import argparse
import logging
import sys

from pydantic import ValidationError

BASE_DIR = Path(__file__).resolve().parent
if str(BASE_DIR) not in sys.path:
    sys.path.insert(0, str(BASE_DIR))

from config import Config
from src.cli import (
    cmd_bench,
    cmd_eval,
    cmd_gen,
    cmd_gradcheck,
    cmd_labels,
    cmd_prototype,
    cmd_stats,
    cmd_train,
    load_run_config,
    parse_overrides,
)
from src.errors import SimProtoError

logger = logging.getLogger("simproto")

COMMANDS = {
    "stats": (cmd_stats, "Class-level semantic representations of a dataset", ("data", "root")),
    "prototype": (cmd_prototype, "Similarity prototype archive from a dataset or representation CSV",
                  ("data", "root")),
    "gen": (cmd_gen, "Generate a synthetic confusable-scene dataset", None),
    "train": (cmd_train, "Train one strategy and write its report and checkpoint", ("data", "root")),
    "eval": (cmd_eval, "Evaluate a checkpoint and export embeddings", ("eval", "checkpoint")),
    "bench": (cmd_bench, "Compare strategies over several seeds", ("data", "root")),
    "gradcheck": (cmd_gradcheck, "Finite-difference check of the loss gradients", None),
    "labels": (cmd_labels, "Export soft label matrices and the confidence schedule", ("prototype", "archive")),
}


def split_overrides(argv: Sequence[str]) -> Tuple[List[str], List[str]]:
    """Separate ``--section.key`` flags (and their values) from the argparse arguments"""
    plain, overrides = [], []
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        token = tokens[i]
        name = token[2:].split("=", 1)[0] if token.startswith("--") else ""
        if "." in name:
            overrides.append(token)
            if "=" not in token and i + 1 < len(tokens):
                overrides.append(tokens[i + 1])
                i += 1
        else:
            plain.append(token)
        i += 1
    return plain, overrides


def _add_globals(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", type=Path, default=default, help="TOML run configuration")
    parser.add_argument("--seed", type=int, default=default, help="Seed for every random draw")
    parser.add_argument("--out", type=Path, default=default,
                        help=f"Output directory (default ${{SIMPROTO_OUTPUT_ROOT}} or {Config.OUTPUT_ROOT})")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="Warnings only, no progress bars")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simproto",
        description="Semantic similarity prototypes, gradient label softening and batch-level contrastive loss",
        epilog="Every configuration key is also a flag: --<section>.<key> VALUE (lists are comma-separated).",
    )
    _add_globals(parser, suppress=False)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text, positional) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        _add_globals(sub, suppress=True)
        if positional is not None:
            sub.add_argument("path", nargs="?", type=Path, help=f"Sets {positional[0]}.{positional[1]}")
    return parser


def collect_overrides(args: argparse.Namespace, override_tokens: Sequence[str]) -> Dict:
    overrides = parse_overrides(override_tokens)
    _, _, positional = COMMANDS[args.command]
    if positional is not None and getattr(args, "path", None) is not None:
        section, key = positional
        overrides.setdefault(section, {})[key] = str(args.path)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out"] = str(args.out)
    if args.quiet:
        overrides["quiet"] = True
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    plain, override_tokens = split_overrides(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(plain)
    level = logging.WARNING if args.quiet else getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)

    try:
        Config.validate()
        config = load_run_config(args.config, collect_overrides(args, override_tokens))
        if config.quiet:
            logging.getLogger().setLevel(logging.WARNING)
        command = COMMANDS[args.command][0]
        command(config)
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"error: invalid configuration\n{e}", file=sys.stderr)
        return 1
    except (SimProtoError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
