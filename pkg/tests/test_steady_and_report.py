from __future__ import annotations

import math
from pathlib import Path

import pytest

from ingestbench.bench.report import SummaryRow, load_rows, parse_summary, summarize, summary_tsv
from ingestbench.bench.steady import detect_steady, steady_window
from ingestbench.constants import SUMMARY_FILE
from ingestbench.errors import InsufficientData


def _series(values):
    return [(5 * i, v) for i, v in enumerate(values)]


def test_constant_series_is_steady() -> None:
    assert detect_steady(_series([250_000.0] * 121)) == (True, 250_000.0)


def test_alternating_series_is_not_steady() -> None:
    values = [300_000.0 if i % 2 else 420_000.0 for i in range(121)]
    window = steady_window(_series(values))
    assert not window.steady
    assert window.rate == pytest.approx(360_000, rel=0.01)
    assert window.cv == pytest.approx(60_000 / 360_000, rel=0.02)


def test_ramp_is_skipped() -> None:
    plateau = 420_000.0
    values = [plateau * (1 - math.exp(-5 * i / 60)) for i in range(121)]
    steady, rate = detect_steady(_series(values), cv_max=0.05)
    assert steady
    assert rate == pytest.approx(plateau, rel=0.05)


def test_short_series() -> None:
    with pytest.raises(InsufficientData):
        detect_steady(_series([1.0] * 40))
    with pytest.raises(InsufficientData):
        detect_steady([(0, 1.0)])


def test_sparse_series_leaves_too_few_points_in_the_window() -> None:
    with pytest.raises(InsufficientData):
        steady_window([(0, 1.0), (300, 1.0)])
    with pytest.raises(InsufficientData):
        steady_window([(0, 1.0), (150, 1.0), (300, 1.0)])
    window = steady_window([(0, 1.0), (150, 2.0), (200, 2.0), (300, 1.0)])
    assert window.points == 2
    assert window.steady and window.rate == 2.0


def test_zero_series_is_flagged() -> None:
    window = steady_window(_series([0.0] * 121))
    assert not window.steady
    assert window.rate == 0


def test_scaling_keeps_the_verdict() -> None:
    values = [100_000 + (i % 7) * 1_000 for i in range(121)]
    steady, rate = detect_steady(_series(values))
    scaled_steady, scaled_rate = detect_steady(_series([3 * v for v in values]))
    assert steady == scaled_steady
    assert scaled_rate == pytest.approx(3 * rate)


def _row(label: str, rate: float, steady: bool = True) -> SummaryRow:
    return SummaryRow(label, 500_000, steady, rate, rate * 215, rate * 1.02, 0.01)


def test_report_orders_by_steady_rate() -> None:
    rows = [_row("b", 340_000), _row("a", 421_000), _row("d", 294_000), _row("c", 338_000)]
    report = summarize(rows)
    assert [r.label for r in report.rows] == ["a", "b", "c", "d"]
    assert report.text.splitlines()[2].startswith("a")


def test_single_and_unsteady_rows() -> None:
    report = summarize([_row("wobbly", 300_000, steady=False)])
    assert len(report.rows) == 1
    assert "NO" in report.text
    assert report.rows[0].peak_rate == pytest.approx(306_000)
    with pytest.raises(ValueError):
        summarize([])


def test_summary_is_idempotent(tmp_path: Path) -> None:
    rows = [_row("x", 123_456.5), _row("y", 98_765.25, steady=False)]
    tsv = summarize(rows).tsv
    (tmp_path / SUMMARY_FILE).write_text(tsv)
    again = summarize(load_rows(tmp_path))
    assert again.tsv == tsv
    assert parse_summary(summary_tsv(again.rows)) == again.rows


if __name__ == "__main__":
    import tempfile

    test_constant_series_is_steady()
    test_alternating_series_is_not_steady()
    test_ramp_is_skipped()
    test_short_series()
    test_sparse_series_leaves_too_few_points_in_the_window()
    test_zero_series_is_flagged()
    test_scaling_keeps_the_verdict()
    test_report_orders_by_steady_rate()
    test_single_and_unsteady_rows()
    with tempfile.TemporaryDirectory() as tmp:
        test_summary_is_idempotent(Path(tmp))
    print("STEADY_AND_REPORT_TEST_OK")
