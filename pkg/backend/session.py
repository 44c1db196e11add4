# backend/session.py
from __future__ import annotations

import fnmatch
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from ingestbench.bench.report import SummaryRow, load_rows
from ingestbench.constants import CONFIG_ECHO_FILE, RUN_META_FILE, SERIES_DIR, SUMMARY_FILE
from ingestbench.errors import UnknownSeries
from ingestbench.metrics.export import parse_tsv, series_filename

RUN_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,127}$")
_SERIES_SUFFIX = ".tsv"


class UnknownRun(KeyError):
    """Run directory not found under the registry root."""


def _read_meta(path: Path) -> Dict[str, str]:
    meta: Dict[str, str] = {}
    if not path.is_file():
        return meta
    for line in path.read_text(encoding="utf-8").splitlines():
        key, sep, value = line.partition(" = ")
        if sep:
            meta[key.strip()] = value.strip()
    return meta


@dataclass
class RunSession:
    """One finished run directory."""

    run_id: str
    path: Path

    @property
    def series_dir(self) -> Path:
        return self.path / SERIES_DIR

    def rows(self) -> List[SummaryRow]:
        return load_rows(self.path)

    def config_echo(self) -> str:
        echo = self.path / CONFIG_ECHO_FILE
        return echo.read_text(encoding="utf-8") if echo.is_file() else ""

    def meta(self) -> Dict[str, str]:
        return _read_meta(self.path / RUN_META_FILE)

    def series_paths(self, pattern: str = "*") -> List[str]:
        if not self.series_dir.is_dir():
            return []
        names = sorted(p.name[: -len(_SERIES_SUFFIX)] for p in self.series_dir.glob(f"*{_SERIES_SUFFIX}"))
        return [name for name in names if fnmatch.fnmatchcase(name, pattern)]

    def series_text(self, metric: str) -> str:
        target = self.series_dir / series_filename(metric)
        if not target.is_file():
            raise UnknownSeries(f"unknown series {metric} in run {self.run_id}")
        return target.read_text(encoding="utf-8")

    def series(self, metric: str) -> List[tuple]:
        return parse_tsv(self.series_text(metric))

    def describe(self) -> Dict[str, object]:
        rows = self.rows()
        return {
            "run_id": self.run_id,
            "label": rows[0].label if rows else self.run_id,
            "summary": [row.__dict__ for row in rows],
            "meta": self.meta(),
        }


class RunRegistry:
    """Finished runs below one root directory; a run is any child holding a summary file."""

    def __init__(self, root: Path):
        self.root = Path(root)

    def run_ids(self) -> List[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / SUMMARY_FILE).is_file())

    def get(self, run_id: str) -> RunSession:
        if not RUN_ID_PATTERN.match(run_id):
            raise UnknownRun(run_id)
        path = self.root / run_id
        if not (path / SUMMARY_FILE).is_file():
            raise UnknownRun(run_id)
        return RunSession(run_id, path)

    def sessions(self) -> List[RunSession]:
        return [RunSession(run_id, self.root / run_id) for run_id in self.run_ids()]

    def new_run_dir(self, label: str, hint: Optional[str] = None) -> str:
        """Fresh run id derived from the label; numbered suffixes avoid collisions."""
        base = re.sub(r"[^A-Za-z0-9._-]+", "-", hint or label).strip("-.") or "run"
        base = base[:100]
        candidate = base
        n = 2
        while (self.root / candidate).exists():
            candidate = f"{base}-{n}"
            n += 1
        return candidate
