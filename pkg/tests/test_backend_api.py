from __future__ import annotations

import asyncio
import socket
from pathlib import Path

import pytest
from fastapi import HTTPException

import backend.app as app_module
from backend.session import RunRegistry
from ingestbench.constants import MESSAGES_IN_RATE
from ingestbench.metrics import GraphiteClient, MetricPoint, SeriesStore

SHORT_RUN = """\
[producer]
acks = 1

[run]
duration_s = 300
step_ms = 100
label = api-10K

[senders.1]
delay_ns = 100000
"""


@pytest.fixture
def registry(tmp_path: Path, monkeypatch) -> RunRegistry:
    reg = RunRegistry(tmp_path)
    monkeypatch.setattr(app_module, "registry", reg)
    monkeypatch.setattr(app_module, "RUNS_DIR", tmp_path)
    return reg


def _start(request: app_module.RunRequest) -> dict:
    async def _run() -> dict:
        app_module.RUN_LOCK = asyncio.Lock()
        return await app_module.start_run(request)

    return asyncio.run(_run())


def test_empty_registry(registry: RunRegistry) -> None:
    assert app_module.list_runs() == {"runs": [], "active": None}
    with pytest.raises(HTTPException) as exc:
        app_module.summary()
    assert exc.value.status_code == 404
    with pytest.raises(HTTPException) as exc:
        app_module.get_run("missing")
    assert exc.value.status_code == 404
    with pytest.raises(HTTPException) as exc:
        app_module.get_run("../etc")
    assert exc.value.status_code == 404


def test_bad_config_is_rejected(registry: RunRegistry) -> None:
    with pytest.raises(HTTPException) as exc:
        _start(app_module.RunRequest(config="[producer]\nacks = 2\n\n[senders.1]\ndelay_ns = 1000\n"))
    assert exc.value.status_code == 400
    assert registry.run_ids() == []


def test_busy_lock_is_conflict(registry: RunRegistry) -> None:
    async def _run() -> None:
        app_module.RUN_LOCK = asyncio.Lock()
        async with app_module.RUN_LOCK:
            with pytest.raises(HTTPException) as exc:
                await app_module.start_run(app_module.RunRequest(config=SHORT_RUN))
            assert exc.value.status_code == 409

    asyncio.run(_run())


def test_run_then_query(registry: RunRegistry) -> None:
    started = _start(app_module.RunRequest(config=SHORT_RUN, run_id="first", seed=7))
    assert started["run_id"] == "first"
    assert started["conservation"]["balanced"]
    assert started["conservation"]["sent"] == 3_000_000
    assert started["summary"]["label"] == "api-10K"

    listed = app_module.list_runs()
    assert [run["run_id"] for run in listed["runs"]] == ["first"]
    assert listed["active"] is None
    assert listed["runs"][0]["meta"]["seed"] == "7"

    info = app_module.get_run("first")
    assert "[senders.1]" in info["config"]
    assert info["series"] > 0

    kafka = app_module.list_series("first", pattern="kafka.server.*")["series"]
    assert MESSAGES_IN_RATE in kafka

    (rendered,) = app_module.render(run="first", target=MESSAGES_IN_RATE)
    assert rendered["target"] == MESSAGES_IN_RATE
    value, t = rendered["datapoints"][-1]
    assert isinstance(t, int)
    assert value > 0

    tsv = app_module.render(run="first", target=MESSAGES_IN_RATE, format="tsv")
    assert tsv.body.decode().startswith("Time\tValue\n")

    with pytest.raises(HTTPException) as exc:
        app_module.render(run="first", target="kafka.server.BrokerTopicMetrics.*.OneMinuteRate", format="tsv")
    assert exc.value.status_code == 400
    with pytest.raises(HTTPException) as exc:
        app_module.render(run="first", target=MESSAGES_IN_RATE, format="png")
    assert exc.value.status_code == 400
    with pytest.raises(HTTPException) as exc:
        app_module.render(run="first", target="kafka.nothing.*")
    assert exc.value.status_code == 404

    report = app_module.summary(runs="first")
    assert report["rows"][0]["label"] == "api-10K"
    assert report["tsv"].startswith("label\t")

    again = _start(app_module.RunRequest(config=SHORT_RUN.replace("300", "250"), run_id="first"))
    assert again["run_id"] == "first-2"



def _free_port() -> int:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_lifespan_runs_the_carbon_listener(monkeypatch) -> None:
    store = SeriesStore()
    monkeypatch.setattr(app_module, "LIVE_STORE", store)
    monkeypatch.setattr(app_module, "CARBON_LISTEN_PORT", _free_port())

    async def _serve() -> int:
        async with app_module.lifespan(app_module.app):
            listener = app_module._listener
            assert listener is not None
            client = GraphiteClient("127.0.0.1", listener.port)
            await client.send([MetricPoint(MESSAGES_IN_RATE, 1.0, 1565000000)])
            await client.close()
            for _ in range(100):
                if listener.accepted:
                    break
                await asyncio.sleep(0.01)
            accepted = listener.accepted
        assert app_module._listener is None
        return accepted

    assert asyncio.run(_serve()) == 1
    assert store.points(MESSAGES_IN_RATE) == [(1565000000, 1.0)]


def test_lifespan_without_a_carbon_port(monkeypatch) -> None:
    monkeypatch.setattr(app_module, "CARBON_LISTEN_PORT", 0)

    async def _serve() -> None:
        async with app_module.lifespan(app_module.app):
            assert app_module._listener is None

    asyncio.run(_serve())
