# ingestbench/metrics/export.py
from __future__ import annotations

from pathlib import Path
from typing import Iterable, List, Tuple

from ingestbench.metrics.graphite import format_value
from ingestbench.metrics.store import SeriesStore

TSV_HEADER = "Time\tValue\n"


def export_tsv(store: SeriesStore, path: str, t0: int, t1: int) -> str:
    """Two-column Time/Value document, Time in seconds since t0."""
    rows = [TSV_HEADER]
    for ts, value in store.points(path, t0, t1):
        rows.append(f"{ts - t0}\t{format_value(value)}\n")
    return "".join(rows)


def series_filename(path: str) -> str:
    return f"{path}.tsv"


def write_series(store: SeriesStore, out_dir: Path, paths: Iterable[str], t0: int, t1: int) -> List[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in paths:
        target = out_dir / series_filename(path)
        target.write_text(export_tsv(store, path, t0, t1), encoding="utf-8")
        written.append(target)
    return written


def parse_tsv(text: str) -> List[Tuple[int, float]]:
    lines = text.splitlines()
    if not lines or lines[0] != TSV_HEADER.rstrip("\n"):
        raise ValueError("missing Time/Value header")
    series = []
    for line in lines[1:]:
        if not line:
            continue
        t, v = line.split("\t")
        series.append((int(t), float(v)))
    return series
