"""Carbon 互換の plaintext 受信サーバと送信クライアントです。
受信側は 1 行ずつ解析して SeriesStore に格納し、不正な行は数えて捨てます。
送信側は RealTime 実行中の tick ごとのメトリクスを外部の Carbon へ流します。
"""

from __future__ import annotations

import asyncio
import logging
from typing import Iterable, Optional, Set

from ingestbench.constants import CARBON_PORT
from ingestbench.errors import MalformedLine
from ingestbench.metrics.graphite import MetricPoint, encode_line, parse_line
from ingestbench.metrics.store import SeriesStore

logger = logging.getLogger(__name__)

MAX_LINE_BYTES = 4096


class CarbonListener:
    """Plaintext-protocol TCP ingest into a SeriesStore."""

    def __init__(self, store: SeriesStore, host: str = "127.0.0.1", port: int = CARBON_PORT):
        self.store = store
        self.host = host
        self.port = port
        self.accepted = 0
        self.malformed = 0
        self._server: Optional[asyncio.AbstractServer] = None
        self._writers: Set[asyncio.StreamWriter] = set()

    def feed_line(self, line: str) -> bool:
        if not line.strip():
            return False
        try:
            point = parse_line(line)
        except MalformedLine as exc:
            self.malformed += 1
            logger.debug("dropped malformed line: %s", exc)
            return False
        self.store.ingest(point)
        self.accepted += 1
        return True

    def feed_bytes(self, raw: bytes) -> bool:
        return self.feed_line(raw.decode("utf-8", errors="replace"))

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        self._writers.add(writer)
        try:
            while True:
                try:
                    raw = await reader.readline()
                except (asyncio.LimitOverrunError, ValueError):
                    self.malformed += 1
                    logger.debug("line over %d bytes, closing connection", MAX_LINE_BYTES)
                    break
                if not raw:
                    break
                self.feed_bytes(raw)
        except ConnectionError:
            pass
        finally:
            self._writers.discard(writer)
            writer.close()

    async def start(self) -> int:
        self._server = await asyncio.start_server(
            self._handle, self.host, self.port, limit=MAX_LINE_BYTES
        )
        sockets = self._server.sockets or []
        if sockets:
            self.port = sockets[0].getsockname()[1]
        logger.info("carbon listener on %s:%d", self.host, self.port)
        return self.port

    async def stop(self) -> None:
        if self._server is None:
            return
        self._server.close()
        for writer in list(self._writers):
            writer.close()
        await self._server.wait_closed()
        self._server = None


class GraphiteClient:
    """Ships metric points to a Carbon endpoint."""

    def __init__(self, host: str, port: int = CARBON_PORT):
        self.host = host
        self.port = port
        self.sent = 0
        self._writer: Optional[asyncio.StreamWriter] = None

    @classmethod
    def from_address(cls, address: str) -> "GraphiteClient":
        host, _, port = address.rpartition(":")
        if not host:
            return cls(address)
        return cls(host, int(port))

    async def connect(self) -> None:
        _, self._writer = await asyncio.open_connection(self.host, self.port)

    async def send(self, points: Iterable[MetricPoint]) -> int:
        if self._writer is None:
            await self.connect()
        assert self._writer is not None
        payload = "".join(encode_line(point) for point in points)
        self._writer.write(payload.encode("ascii"))
        await self._writer.drain()
        count = payload.count("\n")
        self.sent += count
        return count

    async def close(self) -> None:
        if self._writer is None:
            return
        self._writer.close()
        try:
            await self._writer.wait_closed()
        except ConnectionError:
            pass
        self._writer = None
