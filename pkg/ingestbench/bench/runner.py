"""1 回の実行を組み立てて走らせ、結果を出力ディレクトリに書き出します。
トピック作成、送信側の起動、所定時間の実行、flush、系列の書き出し、定常判定の順です。
失敗した場合は書きかけの出力を消します。
"""

from __future__ import annotations

import asyncio
import logging
import platform
import shutil
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ingestbench import __version__
from ingestbench.bench.config import RunConfig, render_config
from ingestbench.bench.report import SummaryRow, summary_tsv
from ingestbench.bench.steady import steady_window
from ingestbench.constants import (
    BYTES_IN_RATE,
    CONFIG_ECHO_FILE,
    MESSAGES_IN_RATE,
    NS_PER_S,
    RUN_META_FILE,
    SERIES_DIR,
    SUMMARY_FILE,
)
from ingestbench.core import ClockMode, make_clock
from ingestbench.loadgen.sender import SenderStats
from ingestbench.metrics.carbon import GraphiteClient
from ingestbench.metrics.export import write_series
from ingestbench.simulate import Simulation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Conservation:
    sent: int
    messages_in: int
    next_offsets: int

    @property
    def balanced(self) -> bool:
        return self.sent == self.messages_in == self.next_offsets


@dataclass
class RunResult:
    label: str
    configured_rate: float
    steady: bool
    steady_rate: float
    steady_bytes: float
    peak_rate: float
    cv: float
    config_echo: str
    conservation: Conservation
    sender_stats: List[SenderStats]
    wall_s: float
    series: Dict[str, List[tuple]] = field(default_factory=dict)
    series_files: List[Path] = field(default_factory=list)
    out_dir: Optional[Path] = None
    simulation: Optional[Simulation] = field(default=None, repr=False)

    def row(self) -> SummaryRow:
        return SummaryRow(
            self.label, self.configured_rate, self.steady, self.steady_rate,
            self.steady_bytes, self.peak_rate, self.cv,
        )


def _drive(sim: Simulation, config: RunConfig, end_ns: int) -> None:
    stop_ns = end_ns + config.run.cooldown_s * NS_PER_S
    if config.run.mode == ClockMode.REALTIME:
        asyncio.run(_drive_realtime(sim, config, end_ns, stop_ns))
        return
    sim.run_until(end_ns)
    sim.flush_all()
    sim.run_until(stop_ns)


async def _drive_realtime(sim: Simulation, config: RunConfig, end_ns: int, stop_ns: int) -> None:
    client = GraphiteClient.from_address(config.run.carbon) if config.run.carbon else None
    try:
        await sim.run_realtime(end_ns, client.send if client else None)
        for producer in sim.producers:
            producer.seal_all()
        await sim.run_realtime(stop_ns, client.send if client else None)
        sim.flush_all()
    finally:
        if client is not None:
            await client.close()


def _series(sim: Simulation) -> Dict[str, List[tuple]]:
    epoch = sim.epoch_s
    return {path: [(ts - epoch, v) for ts, v in sim.store.points(path)] for path in sim.store.paths()}


def execute(config: RunConfig, out_dir: Union[str, Path, None] = None) -> RunResult:
    """Run config end to end; writes series, summary, config echo and metadata when out_dir is set."""
    target = out_dir if out_dir is not None else config.run.out_dir
    out = Path(target) if target else None
    existed = out is not None and out.exists()
    try:
        return _execute(config, out)
    except BaseException:
        if out is not None:
            _remove_partial(out, existed)
        raise


def _remove_partial(out: Path, existed: bool) -> None:
    logger.warning("run failed, removing partial output in %s", out)
    if not existed:
        shutil.rmtree(out, ignore_errors=True)
        return
    shutil.rmtree(out / SERIES_DIR, ignore_errors=True)
    for name in (SUMMARY_FILE, CONFIG_ECHO_FILE, RUN_META_FILE):
        (out / name).unlink(missing_ok=True)


def _execute(config: RunConfig, out: Optional[Path]) -> RunResult:
    started = time.perf_counter()
    run = config.run
    logger.info("run %s: %d sender(s), %s time, %ds", config.label, len(config.senders), run.mode.value, run.duration_s)

    sim = Simulation(config.resources, brokers=run.brokers, step_ms=run.step_ms, clock=make_clock(run.mode))
    topic = sim.create_topic(config.topic)
    lead_in_ns = run.lead_in_s * NS_PER_S
    senders = []
    for spec in config.senders:
        producer = sim.new_producer(topic, spec.producer, spec.locality)
        senders.append(sim.attach_sender(spec, producer, start_ns=lead_in_ns))
    end_ns = max(sender.end_ns for sender in senders)
    _drive(sim, config, end_ns)

    series = _series(sim)
    end_s = end_ns // NS_PER_S
    rate_series = [(t, v) for t, v in series[MESSAGES_IN_RATE] if t <= end_s]
    bytes_series = [(t, v) for t, v in series[BYTES_IN_RATE] if t <= end_s]
    window = steady_window(rate_series, run.ramp_skip_s, run.tail_skip_s, run.cv_max)
    bytes_window = steady_window(bytes_series, run.ramp_skip_s, run.tail_skip_s, run.cv_max)
    peak = float(np.max([v for _, v in rate_series]))

    conservation = Conservation(
        sent=sum(sender.stats.sent for sender in senders),
        messages_in=sim.cluster.meters.messages_in.count,
        next_offsets=topic.total_next_offset(),
    )
    if not conservation.balanced:
        logger.warning("conservation mismatch: %s", conservation)

    result = RunResult(
        label=config.label,
        configured_rate=config.configured_rate,
        steady=window.steady,
        steady_rate=window.rate,
        steady_bytes=bytes_window.rate,
        peak_rate=peak,
        cv=window.cv,
        config_echo=render_config(config),
        conservation=conservation,
        sender_stats=[sender.stats for sender in senders],
        wall_s=0.0,
        series=series,
        out_dir=out,
        simulation=sim,
    )
    if out is not None:
        _write_outputs(sim, result, out)
    result.wall_s = time.perf_counter() - started
    if out is not None:
        (out / RUN_META_FILE).write_text(_run_meta(config, result), encoding="utf-8")
    logger.info(
        "run %s done: steady=%s rate=%.0f peak=%.0f cv=%.4f wall=%.2fs",
        result.label, result.steady, result.steady_rate, result.peak_rate, result.cv, result.wall_s,
    )
    return result


def _write_outputs(sim: Simulation, result: RunResult, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    epoch = sim.epoch_s
    last = max(ts for ts, _ in sim.store.points(MESSAGES_IN_RATE))
    result.series_files = write_series(sim.store, out / SERIES_DIR, sim.store.paths(), epoch, last)
    (out / SUMMARY_FILE).write_text(summary_tsv([result.row()]), encoding="utf-8")
    (out / CONFIG_ECHO_FILE).write_text(result.config_echo, encoding="utf-8")


def _run_meta(config: RunConfig, result: RunResult) -> str:
    c = result.conservation
    lines = [
        f"label = {result.label}",
        f"seed = {config.run.seed}",
        f"mode = {config.run.mode.value}",
        f"ingestbench = {__version__}",
        f"numpy = {np.__version__}",
        f"python = {platform.python_version()}",
        f"sent = {c.sent}",
        f"messages_in = {c.messages_in}",
        f"next_offsets = {c.next_offsets}",
        f"wall_s = {result.wall_s:.3f}",
    ]
    for index, stats in enumerate(result.sender_stats, start=1):
        lines.append(
            f"sender.{index} = attempted={stats.attempted} sent={stats.sent} "
            f"blocked_s={stats.blocked_time / NS_PER_S:.3f}"
        )
    return "\n".join(lines) + "\n"
