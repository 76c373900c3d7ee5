"""
Counters and histograms for checker verdicts, unitary searches and timed operations.

Series are kept in an in-process registry keyed by (name, sorted tags); tests
and campaign summaries read them back from there. When
``PETZLAB_METRICS_ENABLED`` is set the same series are mirrored to Prometheus.
"""

import time
from collections import defaultdict
from contextlib import contextmanager
from functools import wraps
from threading import Lock
from typing import Callable, Optional

from .config import ObservabilityConfig, get_config
from .logger import get_logger

logger = get_logger(__name__)

SeriesKey = tuple[str, tuple[tuple[str, str], ...]]


def _series_key(name: str, tags: Optional[dict[str, str]]) -> SeriesKey:
    return name, tuple(sorted((tags or {}).items()))


class _PrometheusMirror:
    """Lazily registers one Prometheus metric per (kind, name, label set)."""

    def __init__(self, config: ObservabilityConfig, client):
        self.config = config
        self.client = client
        self._metrics: dict[tuple, object] = {}

    @classmethod
    def start(cls, config: ObservabilityConfig) -> Optional["_PrometheusMirror"]:
        try:
            import prometheus_client
        except ImportError:
            logger.warning("prometheus_client not installed, Prometheus export disabled")
            return None
        try:
            prometheus_client.start_http_server(config.prometheus_port)
            logger.info("Prometheus exporter listening", port=config.prometheus_port)
        except OSError as e:
            logger.warning("Prometheus exporter failed to bind", port=config.prometheus_port, error=str(e))
        return cls(config, prometheus_client)

    def series(self, kind: str, name: str, tags: dict[str, str]):
        labels = tuple(sorted(tags))
        key = (kind, name, labels)
        if key not in self._metrics:
            metric_name = "petzlab_" + name.replace(".", "_")
            self._metrics[key] = getattr(self.client, kind)(
                metric_name, name, labelnames=("environment", "service", *labels)
            )
        return self._metrics[key].labels(
            environment=self.config.environment, service=self.config.service_name, **tags
        )


class MetricsCollector:
    def __init__(self):
        config = get_config()
        self._lock = Lock()
        self._counters: dict[SeriesKey, float] = defaultdict(float)
        self._gauges: dict[SeriesKey, float] = {}
        self._histograms: dict[SeriesKey, list[float]] = defaultdict(list)
        self.prometheus = _PrometheusMirror.start(config) if config.metrics_enabled else None

    def record_counter(self, name: str, value: float = 1, tags: Optional[dict[str, str]] = None) -> None:
        with self._lock:
            self._counters[_series_key(name, tags)] += value
        if self.prometheus:
            self.prometheus.series("Counter", name, tags or {}).inc(value)

    def record_gauge(self, name: str, value: float, tags: Optional[dict[str, str]] = None) -> None:
        with self._lock:
            self._gauges[_series_key(name, tags)] = value
        if self.prometheus:
            self.prometheus.series("Gauge", name, tags or {}).set(value)

    def record_histogram(self, name: str, value: float, tags: Optional[dict[str, str]] = None) -> None:
        with self._lock:
            self._histograms[_series_key(name, tags)].append(value)
        if self.prometheus:
            self.prometheus.series("Histogram", name, tags or {}).observe(value)

    def counter_value(self, name: str, tags: Optional[dict[str, str]] = None) -> float:
        with self._lock:
            return self._counters.get(_series_key(name, tags), 0.0)

    def histogram_values(self, name: str, tags: Optional[dict[str, str]] = None) -> list[float]:
        with self._lock:
            return list(self._histograms.get(_series_key(name, tags), ()))

    def reset(self) -> None:
        """Clear the in-process registry. Prometheus series keep their values."""
        with self._lock:
            self._counters.clear()
            self._gauges.clear()
            self._histograms.clear()


_collector: Optional[MetricsCollector] = None


def get_metrics_collector() -> MetricsCollector:
    global _collector
    if _collector is None:
        _collector = MetricsCollector()
    return _collector


@contextmanager
def track_performance(operation: str, tags: Optional[dict[str, str]] = None, record_success: bool = True):
    """
    Time the enclosed block under ``operation.duration.seconds``.

    Also counts ``operation.success`` / ``operation.failure`` and, on an
    exception, ``operation.error`` tagged with the exception type. The
    exception is re-raised.
    """
    tags = {**(tags or {}), "operation": operation}
    collector = get_metrics_collector()
    started = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    except Exception as e:
        collector.record_counter("operation.error", tags={**tags, "error_type": type(e).__name__})
        raise
    finally:
        elapsed = time.perf_counter() - started
        collector.record_histogram("operation.duration.seconds", elapsed, tags=tags)
        if record_success:
            collector.record_counter("operation.success" if ok else "operation.failure", tags=tags)
        logger.debug("Operation finished", seconds=round(elapsed, 3), ok=ok, **tags)


def track_verdict(inequality_id: str, verdict: str, gap: float) -> None:
    """Count one checker verdict; finite gaps (bits) also go to a histogram."""
    collector = get_metrics_collector()
    collector.record_counter("verdict.count", tags={"inequality": inequality_id, "verdict": verdict})
    if gap == gap and abs(gap) != float("inf"):
        collector.record_histogram("verdict.gap.bits", gap, tags={"inequality": inequality_id})


def track_optimizer_run(restarts: int, iterations: int, best_value: float, certified: bool) -> None:
    collector = get_metrics_collector()
    collector.record_histogram("optimizer.restarts", restarts)
    collector.record_histogram("optimizer.iterations", iterations)
    collector.record_histogram("optimizer.best_value", best_value)
    collector.record_counter("optimizer.certified" if certified else "optimizer.uncertified")
    logger.debug(
        "Unitary search finished",
        restarts=restarts,
        iterations=iterations,
        best_value=best_value,
        certified=certified,
    )


def performance_monitor(operation: Optional[str] = None, tags: Optional[dict[str, str]] = None):
    """
    Decorator form of track_performance; the operation defaults to the function name.

    Usage:
        @performance_monitor(operation="optimize_rotation")
        def optimize_rotation(...):
            ...
    """

    def decorator(func: Callable) -> Callable:
        name = operation or func.__name__

        @wraps(func)
        def wrapper(*args, **kwargs):
            with track_performance(name, tags=tags):
                return func(*args, **kwargs)

        return wrapper

    return decorator
