# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

import argparse
import logging
import os
from pathlib import Path
from typing import Optional, Sequence

from .config import load_config
from .ingest import load_stringency
from .pipeline import STAGES, StageError, run
from .plots import emit_plots
from .segmentation import suggest_breakpoints
from .synth import generate_city, load_synth_spec

# **************************************************************************************

logger = logging.getLogger(__name__)

# **************************************************************************************

# The environment variable that overrides the output root:
OUTPUT_ENVIRONMENT_VARIABLE = "SEGMOB_OUT"

# **************************************************************************************


def get_output_root(argument: Optional[str]) -> Optional[Path]:
    """
    Resolve the output root: the --out flag, then $SEGMOB_OUT, else None (so that
    the configuration decides).
    """
    value = argument or os.environ.get(OUTPUT_ENVIRONMENT_VARIABLE)

    return Path(value) if value else None


# **************************************************************************************


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segmob",
        description="Measure socioeconomic segregation in human mobility.",
    )

    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Log debug messages",
    )

    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser(
        "synth",
        help="Generate a synthetic city from a scenario file",
    )

    synth.add_argument("--config", required=True, help="Scenario file with a [synth] section")

    synth.add_argument("--seed", type=int, default=None, help="Override the scenario seed")

    synth.add_argument("--out", default=None, help="Directory to write the city to")

    pipeline = commands.add_parser("run", help="Run the analysis pipeline")

    pipeline.add_argument("--config", required=True, help="Run configuration file")

    pipeline.add_argument(
        "--stage",
        default="all",
        choices=("all",) + STAGES,
        help="Run a single stage (its prerequisites must be complete)",
    )

    pipeline.add_argument(
        "--lenient",
        action="store_true",
        help="Skip malformed trajectory rows instead of failing",
    )

    pipeline.add_argument(
        "--threads",
        type=int,
        default=1,
        help="Maximum number of worker processes",
    )

    pipeline.add_argument(
        "--force",
        action="store_true",
        help="Rerun stages even when their outputs are up to date",
    )

    pipeline.add_argument("--out", default=None, help="Output root directory")

    plots = commands.add_parser(
        "emit-plots",
        help="Write plot-ready tables from a completed run",
    )

    plots.add_argument("--config", default=None, help="Run configuration file")

    plots.add_argument("--out", default=None, help="Output root directory")

    breakpoints = commands.add_parser(
        "suggest-breakpoints",
        help="List dates on which restriction levels jump",
    )

    breakpoints.add_argument(
        "--config",
        default=None,
        help="Run configuration file naming the stringency input",
    )

    breakpoints.add_argument("--stringency", default=None, help="Stringency CSV")

    breakpoints.add_argument(
        "--min-jump",
        type=float,
        default=1.0,
        help="Minimum change of any restriction level",
    )

    return parser


# **************************************************************************************


def run_synth(args: argparse.Namespace) -> int:
    spec = load_synth_spec(Path(args.config), seed=args.seed)

    directory = get_output_root(args.out) or Path(args.config).with_suffix("")

    files = generate_city(spec, directory)

    for role, path in files.items():
        print(f"{role}: {path}")

    return 0


# **************************************************************************************


def run_pipeline(args: argparse.Namespace) -> int:
    if args.threads < 1:
        raise ValueError("--threads must be at least 1")

    output = run(
        Path(args.config),
        stage=args.stage,
        output=get_output_root(args.out),
        lenient=args.lenient,
        threads=args.threads,
        force=args.force,
    )

    print(output)

    return 0


# **************************************************************************************


def run_emit_plots(args: argparse.Namespace) -> int:
    output = get_output_root(args.out)

    if output is None and args.config:
        config = load_config(Path(args.config))
        output = config.output or Path(args.config).parent / "output"

    if output is None:
        raise ValueError(f"Pass --out, --config or set ${OUTPUT_ENVIRONMENT_VARIABLE}")

    for path in emit_plots(output):
        print(path)

    return 0


# **************************************************************************************


def run_suggest_breakpoints(args: argparse.Namespace) -> int:
    path: Optional[Path] = Path(args.stringency) if args.stringency else None

    if path is None and args.config:
        path = load_config(Path(args.config)).stringency

    if path is None:
        raise ValueError("Pass --stringency or a --config naming the stringency input")

    for day in suggest_breakpoints(load_stringency(path), min_jump=args.min_jump):
        print(day.isoformat())

    return 0


# **************************************************************************************


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    The segmob command-line entry point.

    Returns:
        int: The exit status; non-zero when a stage or input fails.
    """
    args = get_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    commands = {
        "synth": run_synth,
        "run": run_pipeline,
        "emit-plots": run_emit_plots,
        "suggest-breakpoints": run_suggest_breakpoints,
    }

    try:
        return commands[args.command](args)
    except StageError as e:
        logger.error("%s", e)
        return 1
    except (ValueError, OSError) as e:
        logger.error("%s: %s", args.command, e)
        return 2


# **************************************************************************************
