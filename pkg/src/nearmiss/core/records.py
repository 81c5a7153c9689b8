"""JSON and JSON-lines storage built on orjson.

Every structured artifact of a run (manifest, segment table, ground-truth
sidecars, training curve, reports) goes through these helpers. JSONL keeps
appends cheap and files human-readable; orjson keeps them fast and its
output is byte-stable for identical inputs.
"""

from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

import orjson

from .logger import get_logger

logger = get_logger(__name__)

_DUMP_OPTIONS = orjson.OPT_SERIALIZE_NUMPY


def dumps(data: Any, *, indent: bool = False) -> bytes:  # noqa: ANN401
    """Serialize ``data`` to JSON bytes.

    Args:
        data: Any orjson-serializable value (dataclasses, numpy arrays and
            scalars included).
        indent: Pretty-print with two-space indentation.

    Returns:
        Encoded JSON

    """
    options = _DUMP_OPTIONS
    if indent:
        options |= orjson.OPT_INDENT_2
    return orjson.dumps(data, option=options)


def write_json(path: Path, data: Any) -> None:  # noqa: ANN401
    """Write ``data`` as indented JSON, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(data, indent=True) + b"\n")


def read_json(path: Path) -> Any:  # noqa: ANN401
    """Read a JSON document.

    Raises:
        FileNotFoundError: If the file doesn't exist

    """
    if not path.exists():
        msg = f"JSON file not found: {path}"
        raise FileNotFoundError(msg)
    return orjson.loads(path.read_bytes())


class JsonlWriter:
    """Append-only JSON-lines writer.

    Use as a context manager; each :meth:`write` emits one record per line.
    """

    def __init__(self, path: Path, *, append: bool = False) -> None:
        """Open ``path`` for writing (truncating unless ``append``)."""
        self.path = path
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("ab" if append else "wb")
        self.count = 0

    def write(self, record: Any) -> None:  # noqa: ANN401
        """Write one record."""
        self._handle.write(dumps(record) + b"\n")
        self.count += 1

    def close(self) -> None:
        """Flush and close the underlying file."""
        self._handle.close()

    def __enter__(self) -> "JsonlWriter":
        """Enter the context manager."""
        return self

    def __exit__(self, *exc_info: object) -> None:
        """Close on exit."""
        self.close()


def write_jsonl(path: Path, records: Iterable[Any]) -> int:
    """Write all ``records`` to ``path``, replacing existing content.

    Returns:
        Number of records written

    """
    with JsonlWriter(path) as writer:
        for record in records:
            writer.write(record)
        count = writer.count
    logger.debug("Wrote %d records to %s", count, path)
    return count


def iter_jsonl(path: Path) -> Iterator[dict[str, Any]]:
    """Yield the records of a JSONL file, skipping blank lines.

    Raises:
        FileNotFoundError: If the file doesn't exist

    """
    if not path.exists():
        msg = f"JSONL file not found: {path}"
        raise FileNotFoundError(msg)
    with path.open("rb") as f:
        for raw_line in f:
            line = raw_line.strip()
            if not line:
                continue
            yield orjson.loads(line)


def read_jsonl(path: Path) -> list[dict[str, Any]]:
    """Load every record of a JSONL file."""
    return list(iter_jsonl(path))
