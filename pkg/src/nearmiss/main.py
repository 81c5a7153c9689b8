"""CLI entry point for the near-miss pipeline."""

import sys
from collections.abc import Sequence

from nearmiss.cli.commands import (
    cmd_eval,
    cmd_explain,
    cmd_plot,
    cmd_prepare,
    cmd_synth,
    cmd_train,
)
from nearmiss.cli.parser import create_parser
from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger

EXIT_FAILURE = 2

command_handlers = {
    "synth": cmd_synth,
    "prepare": cmd_prepare,
    "train": cmd_train,
    "eval": cmd_eval,
    "explain": cmd_explain,
    "plot": cmd_plot,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the nearmiss CLI.

    Returns:
        0 on success, 1 on a usage error, 2 when a command fails

    """
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help and --version exit 0; argparse usage errors become 1
        return 0 if exc.code in (0, None) else 1
    logger = get_logger(__name__)

    handler = command_handlers.get(args.command)
    if handler is None:
        parser.print_help()
        return 1
    try:
        handler(args)
    except (NearMissError, FileNotFoundError) as exc:
        print(  # noqa: T201
            f"error: {type(exc).__name__}: {exc}".replace("\n", " "),
            file=sys.stderr,
        )
        logger.debug("Command %s failed", args.command, exc_info=True)
        return EXIT_FAILURE
    logger.debug("Command %s completed successfully", args.command)
    return 0


if __name__ == "__main__":
    sys.exit(main())
