# ingestbench/bench/scenarios.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    text: str


def _config(
    senders: Sequence[Tuple[int, str]],
    acks: str = "0",
    read_in_ram: bool = True,
    batch_size_bytes: Optional[int] = None,
    label: str = "",
) -> str:
    lines = ["[topic]", "name = ingest", "", "[producer]", f"acks = {acks}"]
    if batch_size_bytes is not None:
        lines.append(f"batch_size_bytes = {batch_size_bytes}")
    lines += ["", "[resources]", "profile = paper-hw", "", "[run]", "duration_s = 600"]
    if label:
        lines.append(f"label = {label}")
    for index, (delay_ns, locality) in enumerate(senders, start=1):
        lines += [
            "",
            f"[senders.{index}]",
            f"delay_ns = {delay_ns}",
            f"read_in_ram = {'true' if read_in_ram else 'false'}",
            f"locality = {locality}",
        ]
    return "\n".join(lines) + "\n"


def _catalogue() -> List[Scenario]:
    out: List[Scenario] = []
    for acks in ("0", "1", "all"):
        out.append(Scenario(
            f"100k-acks{acks}", f"one local sender at 100K, acks={acks}",
            _config([(10_000, "local")], acks=acks, label=f"100K-acks{acks}"),
        ))
    out.append(Scenario(
        "100k-iterator", "one local sender at 100K reading the source through an iterator",
        _config([(10_000, "local")], read_in_ram=False, label="100K-iter"),
    ))
    out.append(Scenario(
        "100k-iterator-remote", "one sender at 100K on an external host reading through an iterator",
        _config([(10_000, "remote:ext1")], read_in_ram=False, label="100K-iter-remote"),
    ))
    out.append(Scenario(
        "250k-iterator", "one local sender at 250K reading the source through an iterator",
        _config([(4_000, "local")], read_in_ram=False, label="250K-iter"),
    ))
    out.append(Scenario(
        "250k-ram", "one local sender at 250K with the source in memory",
        _config([(4_000, "local")], label="250K-ram"),
    ))
    for acks in ("1", "all"):
        out.append(Scenario(
            f"250k-ram-acks{acks}", f"one local sender at 250K with the source in memory, acks={acks}",
            _config([(4_000, "local")], acks=acks, label=f"250K-ram-acks{acks}"),
        ))
    out.append(Scenario(
        "250k-remote", "one sender at 250K on an external host",
        _config([(4_000, "remote:ext1")], label="250K-remote"),
    ))
    for acks in ("0", "1", "all"):
        out.append(Scenario(
            f"1000k-acks{acks}", f"one local sender at 1,000K, acks={acks}",
            _config([(1_000, "local")], acks=acks, label=f"1000K-acks{acks}"),
        ))
    for acks in ("0", "1", "all"):
        out.append(Scenario(
            f"1000k-acks{acks}-batch65540", f"one local sender at 1,000K, acks={acks}, four-fold batch size",
            _config([(1_000, "local")], acks=acks, batch_size_bytes=65_540, label=f"1000K-acks{acks}-b65540"),
        ))
    placements = {
        "local": ("local", "local"),
        "brokers": ("remote:broker2", "remote:broker3"),
        "remote": ("remote:ext1", "remote:ext2"),
    }
    for name, (first, second) in placements.items():
        out.append(Scenario(
            f"500k-two-{name}", f"two senders at 250K each placed {first} and {second}, acks=1",
            _config([(4_000, first), (4_000, second)], acks="1", label=f"2x250K-{name}"),
        ))
    return out


SCENARIOS: Dict[str, Scenario] = {scenario.name: scenario for scenario in _catalogue()}


def list_scenarios() -> List[Scenario]:
    return list(SCENARIOS.values())


def scenario_config(name: str) -> str:
    try:
        return SCENARIOS[name].text
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None
