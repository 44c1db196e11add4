# ingestbench/constants.py
import math
from typing import Tuple

NS_PER_S = 1_000_000_000
MB = 1_000_000

# プロデューサ既定値（Kafka 既定のプロデューサ設定）
DEFAULT_BATCH_SIZE_BYTES = 16_384
DEFAULT_BUFFER_MEMORY_BYTES = 33_554_432
DEFAULT_MIN_INSYNC_REPLICAS = 1
DEFAULT_SEND_BUFFER_BYTES = 131_072

# paper-hw プロファイルの計測値
DEFAULT_DISK_WRITE_BW = 70 * MB
DEFAULT_NIC_BW = 117_500_000
DEFAULT_LOOPBACK_BW = 908 * MB
DEFAULT_CORES = 8
DEFAULT_MTU_BYTES = 1500

# paper-hw プロファイルの較正値
DEFAULT_EFFECTIVE_DISK_BW = 92 * MB
DEFAULT_CPU_COST_PER_MSG_NS = 10_000
DEFAULT_READ_LATENCY_NS = 4_500
DEFAULT_REPLICATION_DELAY_NS = 500_000
RECORD_SIZE_TARGET = 215
DEFAULT_QUEUED_MAX_REQUESTS = 500
DEFAULT_BACKGROUND_PPS = 40.0
DEFAULT_BACKGROUND_PACKET_BYTES = 90
DEFAULT_TCP_WINDOW_BYTES = 65_535
DEFAULT_SPLIT_RECEIVE_CPU_NS = 6_000_000
DEFAULT_HEAP_OLD_GEN_BYTES = 4_000_000_000
DEFAULT_FULL_GC_NS_PER_MB = 5_000_000
DEFAULT_PROFILE_NAME = "paper-hw"

# メーターとロードアベレージ
TICK_INTERVAL_S = 5
TICK_INTERVAL_NS = TICK_INTERVAL_S * NS_PER_S
ONE_MINUTE_S = 60
M1_ALPHA = 1.0 - math.exp(-TICK_INTERVAL_S / ONE_MINUTE_S)
LOAD_DECAY = math.exp(-TICK_INTERVAL_S / ONE_MINUTE_S)
SERIES_RETENTION = 17_280

# データソース
SYNTHETIC_COLUMNS = 66
DEFAULT_SOURCE_RECORDS = 10_000
DEFAULT_DELIMITER = "\t"

# 実行プロトコル
DEFAULT_DURATION_S = 600
DEFAULT_STEP_MS = 50
DEFAULT_COOLDOWN_S = 15
DEFAULT_BROKERS = 3
DEFAULT_SEED = 1
RAMP_SKIP_S = 120
TAIL_SKIP_S = 60
CV_MAX = 0.05
VIRTUAL_EPOCH_S = 1_565_000_000
CARBON_PORT = 2003

# メトリクスのパス
MESSAGES_IN_RATE = "kafka.server.BrokerTopicMetrics.MessagesInPerSec.OneMinuteRate"
MESSAGES_IN_COUNT = "kafka.server.BrokerTopicMetrics.MessagesInPerSec.Count"
BYTES_IN_RATE = "kafka.server.BrokerTopicMetrics.BytesInPerSec.OneMinuteRate"
BYTES_IN_COUNT = "kafka.server.BrokerTopicMetrics.BytesInPerSec.Count"
REPLICATION_BYTES_IN_RATE = "kafka.server.BrokerTopicMetrics.ReplicationBytesInPerSec.OneMinuteRate"
BROKER_METRIC_PREFIX = "kafka.{host}.BrokerTopicMetrics"
LOAD_SHORTTERM = "collectd.{host}.load.load.shortterm"
IF_PACKETS_RX = "collectd.{host}.interface-{iface}.if_packets.rx"
IF_OCTETS_RX = "collectd.{host}.interface-{iface}.if_octets.rx"

IFACE_ETH0 = "eth0"
IFACE_LOOPBACK = "lo"
INTERFACES: Tuple[str, ...] = (IFACE_ETH0, IFACE_LOOPBACK)

# 出力ディレクトリ
SERIES_DIR = "series"
SUMMARY_FILE = "summary.tsv"
CONFIG_ECHO_FILE = "config.echo"
RUN_META_FILE = "run.meta"

PROFILE_DIR_ENV = "INGESTBENCH_PROFILE_DIR"
