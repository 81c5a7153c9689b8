"""Argument parser construction for the nearmiss CLI."""

import argparse

from nearmiss.cli.utils import get_version
from nearmiss.data.splits import SplitName


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    """Options every sub-command accepts."""
    parser.add_argument(
        "--config",
        metavar="FILE",
        help="INI file layered over the packaged defaults "
        "(a bare name such as desk.ini also finds packaged profiles)",
    )
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one config value (repeatable)",
    )
    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Enable verbose output (show debug messages)",
    )


def create_parser() -> argparse.ArgumentParser:
    """Create the main argument parser for the nearmiss CLI."""
    parser = argparse.ArgumentParser(
        prog="nearmiss",
        description="Near-miss dashcam classification with SlowFast",
        epilog="""
Typical pipeline:
  nearmiss synth --config desk.ini
  nearmiss prepare --config desk.ini
  nearmiss train --config desk.ini
  nearmiss eval --config desk.ini
  nearmiss explain --config desk.ini --frames 0,4,7
  nearmiss plot --config desk.ini
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "-v",
        "--version",
        action="version",
        version=f"%(prog)s {get_version()}",
        help="Show version and exit",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    synth_parser = subparsers.add_parser(
        "synth", help="Generate a synthetic clip corpus"
    )
    _add_run_options(synth_parser)
    synth_parser.add_argument(
        "--motion-check",
        action="store_true",
        help="Score the corpus with the frame-difference detector",
    )

    prepare_parser = subparsers.add_parser(
        "prepare", help="Segment clips, split them and estimate statistics"
    )
    _add_run_options(prepare_parser)

    train_parser = subparsers.add_parser("train", help="Train the network")
    _add_run_options(train_parser)
    train_parser.add_argument(
        "--slow-only",
        action="store_true",
        help="Zero the fast pathway input (ablation)",
    )

    eval_parser = subparsers.add_parser(
        "eval", help="Score a checkpoint and compare with baselines"
    )
    _add_run_options(eval_parser)
    eval_parser.add_argument(
        "--checkpoint", metavar="FILE", help="Default: best checkpoint"
    )
    eval_parser.add_argument(
        "--split",
        choices=[name.value for name in SplitName],
        default=SplitName.TEST.value,
    )
    eval_parser.add_argument(
        "--slow-only",
        action="store_true",
        help="Zero the fast pathway input at evaluation time",
    )

    explain_parser = subparsers.add_parser(
        "explain", help="Grad-CAM heatmaps, overlays and gaze comparison"
    )
    _add_run_options(explain_parser)
    explain_parser.add_argument(
        "--checkpoint", metavar="FILE", help="Default: best checkpoint"
    )
    explain_parser.add_argument(
        "--frames",
        metavar="I,J,...",
        help="Pathway frame indices to render (default: explain.frames)",
    )

    plot_parser = subparsers.add_parser(
        "plot", help="Render training curves"
    )
    _add_run_options(plot_parser)
    plot_parser.add_argument(
        "--window",
        type=int,
        metavar="N",
        help="Smoothing window (default: train.smoothing_window)",
    )

    return parser
