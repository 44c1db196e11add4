from ingestbench.bench.config import RunConfig, RunSettings, parse_config, render_config
from ingestbench.bench.profiles import load_profile
from ingestbench.bench.report import Report, SummaryRow, summarize
from ingestbench.bench.runner import Conservation, RunResult, execute
from ingestbench.bench.steady import detect_steady, steady_window

__all__ = [
    "Conservation",
    "Report",
    "RunConfig",
    "RunResult",
    "RunSettings",
    "SummaryRow",
    "detect_steady",
    "execute",
    "load_profile",
    "parse_config",
    "render_config",
    "steady_window",
    "summarize",
]
