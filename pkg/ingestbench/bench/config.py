"""実行設定ファイルの読み込みです。
`[section]` 見出しと `key = value` 行だけの平坦な形式で、未知のキーは行番号付きのエラーにします。
既定値はプロデューサ既定設定と paper-hw プロファイルに一致させます。
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from ingestbench.constants import (
    CV_MAX,
    DEFAULT_BROKERS,
    DEFAULT_COOLDOWN_S,
    DEFAULT_DELIMITER,
    DEFAULT_DURATION_S,
    DEFAULT_PROFILE_NAME,
    DEFAULT_SEED,
    DEFAULT_SOURCE_RECORDS,
    DEFAULT_STEP_MS,
    RAMP_SKIP_S,
    TAIL_SKIP_S,
    TICK_INTERVAL_S,
)
from ingestbench.core import Acks, ClockMode, Locality, ProducerProps, ResourceProfile, TimestampType, TopicConfig
from ingestbench.errors import ConfigError, MissingSection, TypeMismatch, UnknownKey
from ingestbench.loadgen.schedule import delay_for_rate
from ingestbench.loadgen.sender import SenderSpec
from ingestbench.loadgen.sources import DataSourceSpec

SENDER_SECTION = re.compile(r"^senders\.(\d+)$")
DEFAULT_TOPIC_NAME = "ingest"


@dataclass
class Section:
    name: str
    line: int
    entries: Dict[str, Tuple[str, int]] = field(default_factory=dict)


def read_sections(text: str) -> List[Section]:
    """Split config text into sections of raw (value, line) entries."""
    sections: List[Section] = []
    seen: Dict[str, int] = {}
    current: Optional[Section] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"unterminated section header {line!r}", line=lineno)
            name = line[1:-1].strip()
            if name in seen:
                raise ConfigError(f"duplicate section [{name}]", key=name, line=lineno)
            seen[name] = lineno
            current = Section(name, lineno)
            sections.append(current)
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        if current is None:
            raise ConfigError(f"key {key!r} outside of any section", key=key, line=lineno)
        if key in current.entries:
            raise ConfigError(f"duplicate key {key!r} in [{current.name}]", key=key, line=lineno)
        current.entries[key] = (value.strip(), lineno)
    return sections


# ----------------------------------------------------------------------
# 値の変換
# ----------------------------------------------------------------------
def _int(text: str) -> int:
    return int(text.replace("_", ""))


def _float(text: str) -> float:
    return float(text.replace("_", ""))


def _bool(text: str) -> bool:
    value = text.lower()
    if value in ("true", "yes", "on", "1"):
        return True
    if value in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(*allowed: str) -> Callable[[str], str]:
    def convert(text: str) -> str:
        if text not in allowed:
            raise ValueError(f"allowed: {', '.join(allowed)}")
        return text

    return convert


def _text(text: str) -> str:
    return text


_DELIMITER_NAMES = {"\\t": "\t", "tab": "\t", "comma": ",", "space": " "}


def _delimiter(text: str) -> str:
    value = _DELIMITER_NAMES.get(text, text)
    if not value:
        raise ValueError("delimiter must not be empty")
    return value


def _escape_delimiter(value: str) -> str:
    return {"\t": "\\t", " ": "space"}.get(value, value)


TOPIC_KEYS: Dict[str, Callable[[str], Any]] = {
    "name": _text,
    "partitions": _int,
    "replication_factor": _int,
    "timestamp_type": _choice(*(t.value for t in TimestampType)),
}
PRODUCER_KEYS: Dict[str, Callable[[str], Any]] = {
    "batch_size_bytes": _int,
    "buffer_memory_bytes": _int,
    "acks": _choice(*(a.value for a in Acks)),
    "min_insync_replicas": _int,
    "send_buffer_bytes": _int,
}
RESOURCE_KEYS: Dict[str, Callable[[str], Any]] = {
    "profile": _text,
    "disk_write_bw": _float,
    "effective_disk_bw": _float,
    "nic_bw": _float,
    "loopback_bw": _float,
    "cores": _int,
    "cpu_cost_per_msg": _float,
    "mtu_bytes": _int,
    "replication_delay": _int,
    "read_latency_ns": _int,
    "record_size_target": _int,
    "queued_max_requests": _int,
    "background_pps": _float,
    "background_packet_bytes": _int,
    "tcp_window_bytes": _int,
    "split_receive_cpu_ns": _int,
    "heap_old_gen_bytes": _int,
    "full_gc_ns_per_mb": _int,
}
RUN_KEYS: Dict[str, Callable[[str], Any]] = {
    "duration_s": _int,
    "mode": _choice(*(m.value for m in ClockMode)),
    "seed": _int,
    "out_dir": _text,
    "brokers": _int,
    "step_ms": _int,
    "lead_in_s": _int,
    "cooldown_s": _int,
    "label": _text,
    "ramp_skip_s": _float,
    "tail_skip_s": _float,
    "cv_max": _float,
    "carbon": _text,
}
SENDER_KEYS: Dict[str, Callable[[str], Any]] = {
    "delay_ns": _int,
    "rate_mps": _float,
    "duration_s": _int,
    "read_in_ram": _bool,
    "locality": _text,
    "source": _text,
    "delimiter": _delimiter,
    "read_latency_ns": _int,
    "seed": _int,
    "source_records": _int,
    "label": _text,
    **PRODUCER_KEYS,
}


def _convert(section: Section, keys: Dict[str, Callable[[str], Any]]) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for key, (raw, lineno) in section.entries.items():
        converter = keys.get(key)
        if converter is None:
            raise UnknownKey(f"unknown key {key!r} in [{section.name}]", key=key, line=lineno)
        try:
            values[key] = converter(raw)
        except ValueError as exc:
            raise TypeMismatch(f"bad value {raw!r} for {key!r}: {exc}", key=key, line=lineno) from exc
    return values


def _build(section: Section, factory: Callable[..., Any], **kwargs: Any) -> Any:
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise TypeMismatch(f"[{section.name}]: {exc}", key=section.name, line=section.line) from exc


@dataclass(frozen=True)
class RunSettings:
    duration_s: int = DEFAULT_DURATION_S
    mode: ClockMode = ClockMode.VIRTUAL
    seed: int = DEFAULT_SEED
    out_dir: Optional[str] = None
    brokers: int = DEFAULT_BROKERS
    step_ms: int = DEFAULT_STEP_MS
    lead_in_s: int = 0
    cooldown_s: int = DEFAULT_COOLDOWN_S
    label: str = ""
    ramp_skip_s: float = float(RAMP_SKIP_S)
    tail_skip_s: float = float(TAIL_SKIP_S)
    cv_max: float = CV_MAX
    carbon: Optional[str] = None

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ValueError("duration_s must be > 0")
        if self.brokers < 1:
            raise ValueError("brokers must be >= 1")
        if self.lead_in_s < 0 or self.cooldown_s < 0:
            raise ValueError("lead_in_s and cooldown_s must be >= 0")
        if self.cv_max <= 0:
            raise ValueError("cv_max must be > 0")
        if self.step_ms < 1 or (TICK_INTERVAL_S * 1000) % self.step_ms:
            raise ValueError(f"step_ms must divide the {TICK_INTERVAL_S} s tick, got {self.step_ms}")


@dataclass(frozen=True)
class RunConfig:
    topic: TopicConfig
    producer: ProducerProps
    resources: ResourceProfile
    senders: List[SenderSpec]
    run: RunSettings = field(default_factory=RunSettings)

    @property
    def label(self) -> str:
        return self.run.label or default_label(self)

    @property
    def configured_rate(self) -> float:
        return float(sum(s.rate for s in self.senders))


def default_label(config: RunConfig) -> str:
    rate = config.configured_rate
    first = config.senders[0]
    parts = [f"{rate / 1000:g}K", f"acks{first.producer.acks.value}"]
    if not first.read_in_ram:
        parts.append("iter")
    if first.producer.batch_size_bytes != ProducerProps().batch_size_bytes:
        parts.append(f"b{first.producer.batch_size_bytes}")
    if len(config.senders) > 1:
        parts.append(f"{len(config.senders)}x" + "+".join(str(s.locality) for s in config.senders))
    elif not first.locality.is_local:
        parts.append("remote")
    return "-".join(parts)


def _sender(section: Section, index: int, base: ProducerProps, profile: ResourceProfile,
            run: RunSettings) -> SenderSpec:
    values = _convert(section, SENDER_KEYS)
    if ("delay_ns" in values) == ("rate_mps" in values):
        raise ConfigError(
            f"[{section.name}] needs exactly one of delay_ns and rate_mps", key=section.name, line=section.line
        )
    delay_ns = values.pop("delay_ns", None)
    if delay_ns is None:
        delay_ns = _build(section, delay_for_rate, mps=values.pop("rate_mps"))
    overrides = {key: values.pop(key) for key in list(values) if key in PRODUCER_KEYS}
    if "acks" in overrides:
        overrides["acks"] = Acks(overrides["acks"])
    props = _build(section, lambda **kw: dataclasses.replace(base, **kw), **overrides) if overrides else base
    locality = _build(section, Locality.parse, text=values.pop("locality", "local"))
    kwargs = dict(
        delimiter=values.pop("delimiter", DEFAULT_DELIMITER),
        seed=values.pop("seed", run.seed + index - 1),
        records=values.pop("source_records", DEFAULT_SOURCE_RECORDS),
        read_latency_ns=values.pop("read_latency_ns", profile.read_latency_ns),
    )
    source = _build(section, DataSourceSpec.parse, text=values.pop("source", "synthetic"), **kwargs)
    return _build(
        section, SenderSpec,
        delay_ns=delay_ns,
        duration_s=values.pop("duration_s", run.duration_s),
        read_in_ram=values.pop("read_in_ram", True),
        locality=locality,
        producer=props,
        source=source,
        label=values.pop("label", ""),
    )


def parse_config(
    text: str,
    profile_loader: Optional[Callable[[str], ResourceProfile]] = None,
    run_overrides: Optional[Dict[str, Any]] = None,
) -> RunConfig:
    """Parse run configuration text into a RunConfig with every default applied.

    run_overrides replace `[run]` values before the senders are resolved, so a
    seed override also reaches the per-sender source seeds.
    """
    if profile_loader is None:
        from ingestbench.bench.profiles import load_profile

        profile_loader = load_profile

    sections = {section.name: section for section in read_sections(text)}
    sender_sections: Dict[int, Section] = {}
    for name, section in sections.items():
        match = SENDER_SECTION.match(name)
        if match:
            sender_sections[int(match.group(1))] = section
        elif name not in ("topic", "producer", "resources", "run"):
            raise UnknownKey(f"unknown section [{name}]", key=name, line=section.line)

    topic_section = sections.get("topic", Section("topic", 0))
    topic_values = _convert(topic_section, TOPIC_KEYS)
    if "timestamp_type" in topic_values:
        topic_values["timestamp_type"] = TimestampType(topic_values["timestamp_type"])
    topic = _build(topic_section, TopicConfig, **{"name": DEFAULT_TOPIC_NAME, **topic_values})

    producer_section = sections.get("producer", Section("producer", 0))
    producer_values = _convert(producer_section, PRODUCER_KEYS)
    if "acks" in producer_values:
        producer_values["acks"] = Acks(producer_values["acks"])
    producer = _build(producer_section, ProducerProps, **producer_values)

    resources_section = sections.get("resources", Section("resources", 0))
    resource_values = _convert(resources_section, RESOURCE_KEYS)
    profile_name = resource_values.pop("profile", DEFAULT_PROFILE_NAME)
    profile = profile_loader(profile_name)
    if resource_values:
        profile = _build(resources_section, lambda **kw: dataclasses.replace(profile, **kw), **resource_values)

    run_section = sections.get("run", Section("run", 0))
    run_values = _convert(run_section, RUN_KEYS)
    run_values.update({k: v for k, v in (run_overrides or {}).items() if v is not None})
    if "mode" in run_values:
        run_values["mode"] = _build(run_section, lambda mode: ClockMode(mode), mode=run_values["mode"])
    run = _build(run_section, RunSettings, **run_values)
    if topic.replication_factor > run.brokers:
        raise TypeMismatch(
            f"replication_factor {topic.replication_factor} exceeds {run.brokers} brokers",
            key="replication_factor", line=topic_section.entries.get("replication_factor", ("", None))[1],
        )

    if 1 not in sender_sections:
        raise MissingSection("missing [senders.1]", key="senders.1")
    indices = sorted(sender_sections)
    for expected, index in enumerate(indices, start=1):
        if index != expected:
            raise MissingSection(f"missing [senders.{expected}]", key=f"senders.{expected}")
    senders = [_sender(sender_sections[i], i, producer, profile, run) for i in indices]
    return RunConfig(topic=topic, producer=producer, resources=profile, senders=senders, run=run)


def render_config(config: RunConfig) -> str:
    """Canonical text of a resolved configuration; parse_config reads it back."""
    lines = ["[topic]"]
    lines += [
        f"name = {config.topic.name}",
        f"partitions = {config.topic.partitions}",
        f"replication_factor = {config.topic.replication_factor}",
        f"timestamp_type = {config.topic.timestamp_type.value}",
        "",
        "[producer]",
    ]
    lines += _producer_lines(config.producer)
    lines += ["", "[resources]", f"profile = {config.resources.name}"]
    for f in dataclasses.fields(ResourceProfile):
        if f.name != "name":
            lines.append(f"{f.name} = {getattr(config.resources, f.name)!r}")
    lines += ["", "[run]"]
    for f in dataclasses.fields(RunSettings):
        value = getattr(config.run, f.name)
        if value is None or value == "":
            continue
        lines.append(f"{f.name} = {value.value if isinstance(value, ClockMode) else value}")
    for index, sender in enumerate(config.senders, start=1):
        lines += ["", f"[senders.{index}]"]
        lines += [
            f"delay_ns = {sender.delay_ns}",
            f"duration_s = {sender.duration_s}",
            f"read_in_ram = {str(sender.read_in_ram).lower()}",
            f"locality = {sender.locality}",
            "source = " + ("synthetic" if sender.source.path is None else f"file:{sender.source.path}"),
            f"delimiter = {_escape_delimiter(sender.source.delimiter)}",
            f"read_latency_ns = {sender.source.read_latency_ns}",
            f"seed = {sender.source.seed}",
            f"source_records = {sender.source.records}",
        ]
        if sender.label:
            lines.append(f"label = {sender.label}")
        lines += _producer_lines(sender.producer)
    return "\n".join(lines) + "\n"


def _producer_lines(props: ProducerProps) -> List[str]:
    return [
        f"batch_size_bytes = {props.batch_size_bytes}",
        f"buffer_memory_bytes = {props.buffer_memory_bytes}",
        f"acks = {props.acks.value}",
        f"min_insync_replicas = {props.min_insync_replicas}",
        f"send_buffer_bytes = {props.send_buffer_bytes}",
    ]
