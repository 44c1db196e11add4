from __future__ import annotations

import asyncio
import logging
import os
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, AsyncIterator, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from backend.session import RunRegistry, RunSession, UnknownRun
from ingestbench import __version__
from ingestbench.bench.config import parse_config
from ingestbench.bench.report import summarize
from ingestbench.bench.runner import execute
from ingestbench.core import ClockMode
from ingestbench.errors import ConfigError, IngestBenchError
from ingestbench.metrics.carbon import CarbonListener
from ingestbench.metrics.export import TSV_HEADER
from ingestbench.metrics.graphite import format_value
from ingestbench.metrics.store import SeriesStore, match_path

logger = logging.getLogger(__name__)

LIVE_RUN_ID = "live"
RENDER_FORMATS = ("json", "tsv")


def _env_int(env_name: str, default: int, minimum: int, maximum: int) -> int:
    try:
        value = int(os.getenv(env_name, str(default)))
    except (TypeError, ValueError):
        value = default
    return max(minimum, min(maximum, value))


RUNS_DIR = Path(os.getenv("INGESTBENCH_RUNS_DIR", "runs")).resolve()
# 0 でリスナーを起動しない
CARBON_LISTEN_PORT = _env_int("INGESTBENCH_CARBON_PORT", 0, 0, 65535)

registry = RunRegistry(RUNS_DIR)
LIVE_STORE = SeriesStore()
RUN_LOCK = asyncio.Lock()
ACTIVE_RUN: Dict[str, Any] = {"run_id": None}
_listener: Optional[CarbonListener] = None


@asynccontextmanager
async def lifespan(_app: FastAPI) -> AsyncIterator[None]:
    global _listener
    if CARBON_LISTEN_PORT:
        _listener = CarbonListener(LIVE_STORE, host="0.0.0.0", port=CARBON_LISTEN_PORT)
        await _listener.start()
    try:
        yield
    finally:
        if _listener is not None:
            await _listener.stop()
            _listener = None


app = FastAPI(title="ingestbench run API", version=__version__, lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class RunRequest(BaseModel):
    config: str = Field(..., description="run configuration text ([topic], [producer], [senders.N], ...)")
    run_id: Optional[str] = None
    mode: Optional[ClockMode] = None
    seed: Optional[int] = Field(default=None, ge=0)


def _session(run_id: str) -> RunSession:
    try:
        return registry.get(run_id)
    except UnknownRun:
        raise HTTPException(status_code=404, detail=f"run not found: {run_id}")


def _render_series(run: str, target: str) -> Dict[str, List[tuple]]:
    if run == LIVE_RUN_ID:
        paths = LIVE_STORE.find(target)
        return {path: LIVE_STORE.points(path) for path in paths}
    session = _session(run)
    paths = session.series_paths()
    wanted = [p for p in paths if match_path(target, p)]
    return {path: session.series(path) for path in wanted}


@app.get("/runs")
def list_runs():
    return {"runs": [session.describe() for session in registry.sessions()], "active": ACTIVE_RUN["run_id"]}


@app.get("/runs/{run_id}")
def get_run(run_id: str):
    session = _session(run_id)
    info = session.describe()
    info["config"] = session.config_echo()
    info["series"] = len(session.series_paths())
    return info


@app.get("/runs/{run_id}/series")
def list_series(run_id: str, pattern: str = "*"):
    return {"run_id": run_id, "series": _session(run_id).series_paths(pattern)}


@app.get("/render")
def render(run: str, target: str, format: str = "json"):
    if format not in RENDER_FORMATS:
        raise HTTPException(status_code=400, detail=f"invalid format: {format} (must be json/tsv)")
    found = _render_series(run, target)
    if not found:
        raise HTTPException(status_code=404, detail=f"no series matches {target}")
    if format == "tsv":
        if len(found) != 1:
            raise HTTPException(status_code=400, detail="tsv output needs exactly one series")
        (points,) = found.values()
        body = TSV_HEADER + "".join(f"{t}\t{format_value(v)}\n" for t, v in points)
        return PlainTextResponse(body, media_type="text/tab-separated-values")
    # Graphite render API と同じく [value, time] の順
    return [
        {"target": path, "datapoints": [[v, t] for t, v in points]}
        for path, points in found.items()
    ]


@app.get("/summary")
def summary(runs: str = ""):
    run_ids = [r.strip() for r in runs.split(",") if r.strip()] or registry.run_ids()
    rows = []
    for run_id in run_ids:
        rows.extend(_session(run_id).rows())
    if not rows:
        raise HTTPException(status_code=404, detail="no finished runs")
    report = summarize(rows)
    return {"rows": [row.__dict__ for row in report.rows], "text": report.text, "tsv": report.tsv}


@app.post("/runs")
async def start_run(request: RunRequest):
    overrides = {"mode": request.mode, "seed": request.seed}
    try:
        config = parse_config(request.config, run_overrides=overrides)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    if RUN_LOCK.locked():
        raise HTTPException(status_code=409, detail=f"run {ACTIVE_RUN['run_id']} is in progress")
    async with RUN_LOCK:
        run_id = registry.new_run_dir(config.label, request.run_id)
        ACTIVE_RUN["run_id"] = run_id
        logger.info("starting run %s", run_id)
        try:
            result = await asyncio.to_thread(execute, config, registry.root / run_id)
        except IngestBenchError as exc:
            raise HTTPException(status_code=500, detail=str(exc))
        finally:
            ACTIVE_RUN["run_id"] = None
    return {
        "run_id": run_id,
        "summary": result.row().__dict__,
        "conservation": {
            "sent": result.conservation.sent,
            "messages_in": result.conservation.messages_in,
            "next_offsets": result.conservation.next_offsets,
            "balanced": result.conservation.balanced,
        },
        "wall_s": result.wall_s,
    }
