"""
Logging, metrics and error capture for petzlab.

The CLI calls ``init_observability()`` once per process; library code only
needs ``get_logger`` and the ``track_*`` helpers.
"""

from typing import Optional

from .config import ObservabilityConfig, get_config, set_config
from .errors import capture_exception, init_error_tracking, with_error_tracking
from .logger import LogContext, get_logger, init_logging, set_campaign_id
from .metrics import (
    MetricsCollector,
    get_metrics_collector,
    performance_monitor,
    track_optimizer_run,
    track_performance,
    track_verdict,
)

__version__ = "0.1.0"

__all__ = [
    "LogContext",
    "MetricsCollector",
    "ObservabilityConfig",
    "capture_exception",
    "get_config",
    "get_logger",
    "get_metrics_collector",
    "init_observability",
    "performance_monitor",
    "set_campaign_id",
    "set_config",
    "track_optimizer_run",
    "track_performance",
    "track_verdict",
    "with_error_tracking",
]


def init_observability(config: Optional[ObservabilityConfig] = None) -> None:
    if config is not None:
        set_config(config)
    init_logging()
    init_error_tracking()
    get_logger(__name__).debug("Observability ready", version=__version__, environment=get_config().environment)
