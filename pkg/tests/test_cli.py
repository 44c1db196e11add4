from __future__ import annotations

from pathlib import Path

from ingestbench.bench.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from ingestbench.bench.report import load_rows
from ingestbench.constants import CONFIG_ECHO_FILE, MESSAGES_IN_RATE, RUN_META_FILE, SERIES_DIR, SUMMARY_FILE

SHORT_RUN = """\
[topic]
name = ingest

[producer]
acks = 0

[run]
duration_s = 300
step_ms = 100
label = short-10K

[senders.1]
delay_ns = 100000
"""


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "run.conf"
    path.write_text(text, encoding="utf-8")
    return path


def test_scenarios_lists_catalogue(capsys) -> None:
    assert main(["scenarios"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "100k-acks0" in out
    assert "500k-two-remote" in out


def test_bad_config_exits_with_config_code(tmp_path: Path) -> None:
    path = _write(tmp_path, "[producer]\nacks = 2\n\n[senders.1]\ndelay_ns = 1000\n")
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG
    assert main(["run", "--scenario", "no-such-scenario"]) == EXIT_CONFIG


def test_missing_series_exits_with_runtime_code(tmp_path: Path) -> None:
    assert main(["export", "--run", str(tmp_path), "--metric", "kafka.nothing"]) == EXIT_RUNTIME


def test_run_report_export(tmp_path: Path, capsys) -> None:
    out = tmp_path / "out"
    assert main(["run", "--config", str(_write(tmp_path, SHORT_RUN)), "--out", str(out)]) == EXIT_OK
    assert "short-10K" in capsys.readouterr().out
    assert (out / SUMMARY_FILE).is_file()
    assert (out / CONFIG_ECHO_FILE).is_file()
    assert (out / RUN_META_FILE).is_file()
    assert (out / SERIES_DIR).is_dir()

    (row,) = load_rows(out)
    assert row.label == "short-10K"
    assert row.configured_rate == 10_000
    assert 9_800 <= row.steady_rate <= 10_200

    meta = (out / RUN_META_FILE).read_text(encoding="utf-8")
    assert "sent = 3000000" in meta

    tsv = tmp_path / "summary.tsv"
    assert main(["report", "--runs", str(out), "--tsv", str(tsv)]) == EXIT_OK
    assert tsv.read_text(encoding="utf-8") == (out / SUMMARY_FILE).read_text(encoding="utf-8")
    capsys.readouterr()

    assert main(["export", "--run", str(out), "--metric", MESSAGES_IN_RATE]) == EXIT_OK
    exported = capsys.readouterr().out
    assert exported.startswith("Time\tValue\n")


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        test_bad_config_exits_with_config_code(Path(tmp))
        test_missing_series_exits_with_runtime_code(Path(tmp))
    print("CLI_TEST_OK")
