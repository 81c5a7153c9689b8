"""Baseline comparison table and the evaluation report files."""

from collections.abc import Mapping
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Any, Self

from nearmiss.core.logger import get_logger
from nearmiss.core.records import read_json, write_json
from nearmiss.metrics.scores import MetricsError, MetricsReport, format_percent
from nearmiss.utils.paths import resolve_config_file

logger = get_logger(__name__)

# Column order of the comparison table.
TABLE_COLUMNS = ("precision", "recall", "f1", "accuracy")
_HEADERS = {
    "precision": "Precision (%)",
    "recall": "Recall (%)",
    "f1": "F1 (%)",
    "accuracy": "Accuracy (%)",
}
OURS_NAME = "Ours"
OURS_MODALITY = "V"


@dataclass(frozen=True)
class BaselineRow:
    """Published scores of one method; ``None`` marks an unreported cell."""

    method: str
    modality: str
    scores: Mapping[str, Decimal | None]

    @property
    def name(self) -> str:
        """``"<method> (<modality>)"``, unique within a table."""
        return f"{self.method} ({self.modality})"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Self:
        """Parse one fixture row; numbers are read as decimal text."""
        scores = {
            col: None if data.get(col) is None else Decimal(str(data[col]))
            for col in TABLE_COLUMNS
        }
        return cls(
            method=str(data["method"]),
            modality=str(data["modality"]),
            scores=scores,
        )


@dataclass(frozen=True)
class Baselines:
    """Baseline rows plus the default reference and modality legend."""

    rows: tuple[BaselineRow, ...]
    reference: str
    modalities: Mapping[str, str]
    source: str = ""

    def get(self, name: str) -> BaselineRow:
        """Row called ``name``.

        Raises:
            MetricsError: If no row has that name

        """
        for row in self.rows:
            if row.name == name:
                return row
        known = ", ".join(row.name for row in self.rows)
        msg = f"unknown reference baseline {name!r}; known: {known}"
        raise MetricsError(msg)


def load_baselines(path: Path | None = None) -> Baselines:
    """Read the baseline fixture (packaged ``baselines.json`` by default)."""
    source = path or resolve_config_file("baselines.json")
    data = read_json(source)
    return Baselines(
        rows=tuple(BaselineRow.from_dict(row) for row in data["rows"]),
        reference=str(data["reference"]),
        modalities=dict(data.get("modalities", {})),
        source=str(data.get("source", "")),
    )


def format_delta(delta: Decimal) -> str:
    """``26.88↑`` for a gain, ``3.10↓`` for a loss, ``0.00`` for a tie."""
    if delta > 0:
        return f"{delta:.2f}↑"
    if delta < 0:
        return f"{-delta:.2f}↓"
    return f"{delta:.2f}"


@dataclass(frozen=True)
class ComparisonTable:
    """Our scores against the baselines, with deltas to one reference."""

    ours: MetricsReport
    baselines: Baselines
    reference: str
    deltas: Mapping[str, Decimal | None]

    def to_dict(self) -> dict[str, Any]:
        """JSON form with every cell as two-decimal text."""
        ours = self.ours.rounded()
        return {
            "reference": self.reference,
            "ours": {col: format_percent(ours[col]) for col in TABLE_COLUMNS},
            "deltas": {
                col: None if d is None else format_percent(d)
                for col, d in self.deltas.items()
            },
            "baselines": [
                {
                    "name": row.name,
                    **{
                        col: format_percent(row.scores[col])
                        for col in TABLE_COLUMNS
                    },
                }
                for row in self.baselines.rows
            ],
        }

    def render(self) -> str:
        """Aligned plain-text table with footnote markers."""
        marks = {"source": 1}
        for code in self.baselines.modalities:
            marks[code] = len(marks) + 1
        delta_mark = len(marks) + 1

        def name_cell(method: str, modality: str, *, baseline: bool) -> str:
            source = f"*{marks['source']}" if baseline else ""
            modal = f"*{marks[modality]}" if modality in marks else ""
            return f"{method}{source} ({modality}{modal})"

        body: list[list[str]] = [
            [
                name_cell(row.method, row.modality, baseline=True),
                *(format_percent(row.scores[col]) for col in TABLE_COLUMNS),
            ]
            for row in self.baselines.rows
        ]
        ours = self.ours.rounded()
        ours_cells = [name_cell(OURS_NAME, OURS_MODALITY, baseline=False)]
        for col in TABLE_COLUMNS:
            cell = format_percent(ours[col])
            delta = self.deltas.get(col)
            if delta is not None:
                cell = f"{cell} ({format_delta(delta)})*{delta_mark}"
            ours_cells.append(cell)
        body.append(ours_cells)

        header = ["Method", *(_HEADERS[col] for col in TABLE_COLUMNS)]
        widths = [
            max(len(r[i]) for r in [header, *body])
            for i in range(len(header))
        ]
        lines = [
            "  ".join(c.ljust(w) for c, w in zip(r, widths, strict=True))
            .rstrip()
            for r in [header, *body]
        ]
        lines.insert(1, "  ".join("-" * w for w in widths))
        notes = [f"*{marks['source']} published baseline"]
        if self.baselines.source:
            notes[0] = f"{notes[0]} ({self.baselines.source})"
        notes.extend(
            f"*{marks[code]} {code}: {text}"
            for code, text in self.baselines.modalities.items()
        )
        notes.append(f"*{delta_mark} compared to {self.reference}")
        return "\n".join([*lines, "", *notes]) + "\n"


def improvement_table(
    ours: MetricsReport,
    baselines: Baselines,
    reference_name: str | None = None,
) -> ComparisonTable:
    """Compare ``ours`` with ``baselines`` relative to one reference row.

    Deltas are taken between the two-decimal displayed values, so they
    match the table cells exactly. A missing reference cell has no delta.

    Raises:
        MetricsError: If the reference is not a baseline row

    """
    reference = reference_name or baselines.reference
    ref_row = baselines.get(reference)
    rounded = ours.rounded()
    deltas: dict[str, Decimal | None] = {}
    for col in TABLE_COLUMNS:
        ref = ref_row.scores[col]
        deltas[col] = None if ref is None else rounded[col] - ref
    return ComparisonTable(
        ours=ours, baselines=baselines, reference=reference, deltas=deltas
    )


def write_report(
    out_dir: Path,
    report: MetricsReport,
    table: ComparisonTable | None = None,
    extra: Mapping[str, Any] | None = None,
) -> tuple[Path, Path]:
    """Write ``metrics.json`` and ``metrics.txt`` into ``out_dir``.

    Returns:
        Paths of the JSON and text reports

    """
    payload: dict[str, Any] = {**(extra or {}), "metrics": report.to_dict()}
    if table is not None:
        payload["comparison"] = table.to_dict()
    json_path = out_dir / "metrics.json"
    text_path = out_dir / "metrics.txt"
    write_json(json_path, payload)

    rounded = report.rounded()
    lines = [
        f"{name:<10} {format_percent(rounded[name])}"
        for name in ("accuracy", "precision", "recall", "f1")
    ]
    if report.confusion is not None:
        cm = report.confusion
        lines.append(
            f"confusion  tp={cm.tp} fn={cm.fn} fp={cm.fp} tn={cm.tn}"
        )
    if report.flags:
        lines.append("flags      " + ", ".join(sorted(report.flags)))
    text = "\n".join(lines) + "\n"
    if table is not None:
        text = f"{text}\n{table.render()}"
    text_path.write_text(text, encoding="utf-8")
    logger.info("Wrote %s and %s", json_path, text_path)
    return json_path, text_path
