from __future__ import annotations

import pytest

from ingestbench.bench.config import parse_config
from ingestbench.bench.scenarios import SCENARIOS, list_scenarios, scenario_config
from ingestbench.core import Acks


def test_every_scenario_parses() -> None:
    assert len(list_scenarios()) == 19
    for scenario in list_scenarios():
        config = parse_config(scenario.text)
        assert config.run.duration_s == 600
        assert config.resources.name == "paper-hw"
        assert config.label


def test_scenario_settings() -> None:
    iterator = parse_config(scenario_config("250k-iterator"))
    assert not iterator.senders[0].read_in_ram
    assert iterator.configured_rate == 250_000
    big = parse_config(scenario_config("1000k-acks1-batch65540"))
    assert big.producer.batch_size_bytes == 65_540
    assert big.producer.acks is Acks.ACKS1
    remote = parse_config(scenario_config("500k-two-remote"))
    assert [str(s.locality) for s in remote.senders] == ["remote:ext1", "remote:ext2"]
    assert remote.configured_rate == 500_000
    assert "500k-two-brokers" in SCENARIOS
    for acks, expected in (("0", Acks.ACKS0), ("all", Acks.ALL)):
        config = parse_config(scenario_config(f"1000k-acks{acks}-batch65540"))
        assert config.producer.batch_size_bytes == 65_540
        assert config.producer.acks is expected
    for name in ("100k-iterator", "100k-iterator-remote"):
        config = parse_config(scenario_config(name))
        assert not config.senders[0].read_in_ram
        assert config.configured_rate == 100_000
    assert str(parse_config(scenario_config("100k-iterator-remote")).senders[0].locality) == "remote:ext1"
    for acks, expected in (("1", Acks.ACKS1), ("all", Acks.ALL)):
        config = parse_config(scenario_config(f"250k-ram-acks{acks}"))
        assert config.senders[0].read_in_ram
        assert config.producer.acks is expected


def test_unknown_scenario() -> None:
    with pytest.raises(KeyError):
        scenario_config("9000k")


if __name__ == "__main__":
    test_every_scenario_parses()
    test_scenario_settings()
    test_unknown_scenario()
    print("SCENARIOS_TEST_OK")
