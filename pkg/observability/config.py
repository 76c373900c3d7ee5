"""
Observability settings read from ``PETZLAB_*`` environment variables.

Numerics settings (tolerances, budgets, seeds) live in petzlab.config; this
module only covers where log records, metrics and captured errors go.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

ENV_PREFIX = "PETZLAB_"

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
LOG_FORMATS = ("text", "json")


def _env(name: str, default: Optional[str] = None) -> Optional[str]:
    return os.getenv(ENV_PREFIX + name, default)


def _env_flag(name: str) -> bool:
    return (_env(name) or "").strip().lower() in ("1", "true", "yes", "on")


def _from_env(name: str, default: Optional[str] = None, cast=str):
    def read():
        raw = _env(name, default)
        return None if raw is None else cast(raw)

    return field(default_factory=read)


@dataclass
class ObservabilityConfig:
    # stderr records; the optional file always gets JSON lines
    log_level: str = _from_env("LOG_LEVEL", "INFO")
    log_format: str = _from_env("LOG_FORMAT", "text")
    log_file: Optional[str] = _from_env("LOG_FILE")

    # Prometheus mirror of the in-process registry
    metrics_enabled: bool = field(default_factory=lambda: _env_flag("METRICS_ENABLED"))
    prometheus_port: int = _from_env("PROMETHEUS_PORT", "8000", int)

    sentry_enabled: bool = field(default_factory=lambda: _env_flag("SENTRY_ENABLED"))
    sentry_dsn: Optional[str] = _from_env("SENTRY_DSN")
    sentry_traces_sample_rate: float = _from_env("SENTRY_TRACES_SAMPLE_RATE", "0.0", float)

    service_name: str = _from_env("SERVICE_NAME", "petzlab")
    environment: str = _from_env("ENVIRONMENT", "dev")

    def validate(self) -> list[str]:
        """Return one message per bad setting; empty when the config is usable."""
        issues = []
        if self.log_level.upper() not in LOG_LEVELS:
            issues.append(f"{ENV_PREFIX}LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {self.log_level!r}")
        if self.log_format not in LOG_FORMATS:
            issues.append(f"{ENV_PREFIX}LOG_FORMAT must be 'text' or 'json', got {self.log_format!r}")
        if self.sentry_enabled and not self.sentry_dsn:
            issues.append(f"{ENV_PREFIX}SENTRY_ENABLED is set without {ENV_PREFIX}SENTRY_DSN")
        if not 0.0 <= self.sentry_traces_sample_rate <= 1.0:
            issues.append(f"{ENV_PREFIX}SENTRY_TRACES_SAMPLE_RATE must lie in [0, 1], got {self.sentry_traces_sample_rate}")
        if not 0 < self.prometheus_port < 65536:
            issues.append(f"{ENV_PREFIX}PROMETHEUS_PORT out of range: {self.prometheus_port}")
        return issues


_config: Optional[ObservabilityConfig] = None


def get_config() -> ObservabilityConfig:
    global _config
    if _config is None:
        _config = ObservabilityConfig()
    return _config


def set_config(config: ObservabilityConfig) -> None:
    global _config
    _config = config
