"""実行結果の要約表です。
1 実行 1 行で、定常レートの降順に並べたテキスト表と TSV を作ります。
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, List, Sequence, Union

from ingestbench.constants import SUMMARY_FILE
from ingestbench.metrics.graphite import format_value

if TYPE_CHECKING:
    from ingestbench.bench.runner import RunResult

SUMMARY_COLUMNS = ("label", "configured_rate", "steady", "steady_rate", "steady_bytes", "peak_rate", "cv")


@dataclass(frozen=True)
class SummaryRow:
    label: str
    configured_rate: float
    steady: bool
    steady_rate: float
    steady_bytes: float
    peak_rate: float
    cv: float

    def to_tsv(self) -> str:
        return "\t".join([
            self.label,
            format_value(self.configured_rate),
            "true" if self.steady else "false",
            format_value(self.steady_rate),
            format_value(self.steady_bytes),
            format_value(self.peak_rate),
            format_value(self.cv),
        ]) + "\n"

    @classmethod
    def from_tsv(cls, line: str) -> "SummaryRow":
        fields = line.rstrip("\n").split("\t")
        if len(fields) != len(SUMMARY_COLUMNS):
            raise ValueError(f"expected {len(SUMMARY_COLUMNS)} columns, got {len(fields)}")
        label, configured, steady, rate, nbytes, peak, cv = fields
        return cls(label, float(configured), steady == "true", float(rate), float(nbytes), float(peak), float(cv))


@dataclass(frozen=True)
class Report:
    rows: List[SummaryRow]
    text: str
    tsv: str


def summary_tsv(rows: Sequence[SummaryRow]) -> str:
    return "\t".join(SUMMARY_COLUMNS) + "\n" + "".join(row.to_tsv() for row in rows)


def parse_summary(text: str) -> List[SummaryRow]:
    lines = [line for line in text.splitlines() if line]
    if not lines or tuple(lines[0].split("\t")) != SUMMARY_COLUMNS:
        raise ValueError("missing summary header")
    return [SummaryRow.from_tsv(line) for line in lines[1:]]


def load_rows(run_dir: Path) -> List[SummaryRow]:
    return parse_summary((Path(run_dir) / SUMMARY_FILE).read_text(encoding="utf-8"))


def _k(value: float) -> str:
    return f"{value / 1000:,.1f}K"


def format_table(rows: Sequence[SummaryRow]) -> str:
    header = ("run", "configured", "steady", "rate", "MB/s", "peak", "cv")
    body = [
        (
            row.label,
            _k(row.configured_rate),
            "yes" if row.steady else "NO",
            _k(row.steady_rate),
            f"{row.steady_bytes / 1e6:.1f}",
            _k(row.peak_rate),
            f"{row.cv:.3f}",
        )
        for row in rows
    ]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = []
    for i, cells in enumerate([header, *body]):
        lines.append("  ".join(
            cell.ljust(w) if j == 0 else cell.rjust(w) for j, (cell, w) in enumerate(zip(cells, widths))
        ).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def summarize(results: Sequence[Union["RunResult", SummaryRow]]) -> Report:
    """Rows sorted by steady rate, highest first; unsteady rows stay in and are flagged."""
    if not results:
        raise ValueError("summarize needs at least one result")
    rows = [r if isinstance(r, SummaryRow) else r.row() for r in results]
    rows.sort(key=lambda row: (-row.steady_rate, row.label))
    return Report(rows, format_table(rows), summary_tsv(rows))
