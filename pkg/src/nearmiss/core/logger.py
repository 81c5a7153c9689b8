"""Logging for pipeline runs.

Every sub-command of a run appends to the same ``<run>/logs/nearmiss.log``,
so file lines carry the command that wrote them. The console stays terse:
messages only, INFO and up unless ``--verbose``.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOG_FILE = "nearmiss.log"
MAX_LOG_BYTES = 5 * 1024 * 1024
LOG_BACKUPS = 3
FILE_FORMAT = (
    "%(asctime)s - %(command)s - %(name)s - %(levelname)s - %(message)s"
)


class _CommandFilter(logging.Filter):
    """Stamps records with the sub-command that produced them."""

    def __init__(self, command: str) -> None:
        super().__init__()
        self.command = command

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = self.command
        return True


def default_log_dir() -> Path:
    """Fallback log location for code run outside a run directory."""
    return Path.home() / ".config" / "nearmiss" / "logs"


def setup_logging(
    verbose: bool = False,
    log_dir: Path | None = None,
    command: str | None = None,
) -> None:
    """Route all logging to the run log file and to stderr.

    Replaces any handlers installed earlier, so calling it once per
    command is safe. matplotlib and PIL are held at WARNING.

    Args:
        verbose: Show DEBUG on the console (the file always gets DEBUG)
        log_dir: Usually ``<output_dir>/logs``; see :func:`default_log_dir`
        command: Sub-command name written on each file line

    """
    log_dir = log_dir or default_log_dir()
    log_dir.mkdir(parents=True, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in root_logger.handlers:
        handler.close()
    root_logger.handlers.clear()

    file_handler = RotatingFileHandler(
        log_dir / LOG_FILE,
        maxBytes=MAX_LOG_BYTES,
        backupCount=LOG_BACKUPS,
        encoding="utf-8",
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.addFilter(_CommandFilter(command or "-"))
    file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
    root_logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    console_handler.setFormatter(logging.Formatter("%(message)s"))
    root_logger.addHandler(console_handler)

    for noisy in ("matplotlib", "PIL"):
        logging.getLogger(noisy).setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Module logger; pass ``__name__``."""
    return logging.getLogger(name)
