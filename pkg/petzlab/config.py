"""
Numerical configuration: tolerances, optimizer budgets and campaign defaults.

Values come from PETZLAB_* environment variables with the documented defaults.
Scoped overrides (tolerance tightening and extended-precision eigensolves) are
kept in context variables so they never leak between campaign workers.
"""

import os
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Iterator, Optional

ENV_PREFIX = "PETZLAB_"

PRECISION_DOUBLE = "double"
PRECISION_EXTENDED = "extended"


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(ENV_PREFIX + name, str(default)))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(ENV_PREFIX + name, str(default)))


@dataclass
class LabConfig:
    """Tolerances and defaults shared by every petzlab module."""

    # opmath
    herm_rel_tol: float = field(default_factory=lambda: _env_float("HERM_REL_TOL", 1e-10))
    psd_rel_tol: float = field(default_factory=lambda: _env_float("PSD_REL_TOL", 1e-10))
    support_rel_tol: float = field(default_factory=lambda: _env_float("SUPPORT_REL_TOL", 1e-12))
    recon_tol: float = field(default_factory=lambda: _env_float("RECON_TOL", 1e-9))

    # states / channels
    trace_tol: float = field(default_factory=lambda: _env_float("TRACE_TOL", 1e-10))
    cptp_tol: float = field(default_factory=lambda: _env_float("CPTP_TOL", 1e-9))
    petz_completeness_tol: float = field(default_factory=lambda: _env_float("PETZ_COMPLETENESS_TOL", 1e-8))
    channel_env_dim: int = field(default_factory=lambda: _env_int("CHANNEL_ENV_DIM", 2))

    # entropic
    supp_viol_tol: float = field(default_factory=lambda: _env_float("SUPP_VIOL_TOL", 1e-9))
    self_check_tol: float = field(default_factory=lambda: _env_float("SELF_CHECK_TOL", 1e-9))

    # recovery
    cert_tol: float = field(default_factory=lambda: _env_float("CERT_TOL", 1e-6))
    budget_restarts: int = field(default_factory=lambda: _env_int("BUDGET_RESTARTS", 20))
    budget_iters: int = field(default_factory=lambda: _env_int("BUDGET_ITERS", 300))
    fd_step: float = field(default_factory=lambda: _env_float("FD_STEP", 1e-5))

    # typicality
    dense_cap: int = field(default_factory=lambda: _env_int("DENSE_CAP", 4096))
    shell_merge_rtol: float = field(default_factory=lambda: _env_float("SHELL_MERGE_RTOL", 1e-9))

    # inequalities
    verdict_tol: float = field(default_factory=lambda: _env_float("VERDICT_TOL", 1e-8))
    violation_floor: float = field(default_factory=lambda: _env_float("VIOLATION_FLOOR", 1e-5))
    identity_tol: float = field(default_factory=lambda: _env_float("IDENTITY_TOL", 1e-9))

    # campaigns
    jobs: Optional[int] = field(
        default_factory=lambda: int(os.environ[ENV_PREFIX + "JOBS"]) if os.getenv(ENV_PREFIX + "JOBS") else None
    )
    store_path: Optional[str] = field(default_factory=lambda: os.getenv(ENV_PREFIX + "STORE_PATH"))
    extended_dps: int = field(default_factory=lambda: _env_int("EXTENDED_DPS", 40))

    def validate(self) -> list[str]:
        """Validate configuration and return list of issues."""
        issues = []

        for name in (
            "herm_rel_tol", "psd_rel_tol", "support_rel_tol", "recon_tol", "trace_tol",
            "cptp_tol", "supp_viol_tol", "cert_tol", "fd_step", "verdict_tol",
            "violation_floor", "shell_merge_rtol", "identity_tol",
        ):
            if getattr(self, name) <= 0:
                issues.append(f"Invalid {ENV_PREFIX}{name.upper()}: {getattr(self, name)} (must be > 0)")

        if self.violation_floor < self.verdict_tol:
            issues.append(
                f"violation_floor {self.violation_floor} below verdict_tol {self.verdict_tol}; "
                "the inconclusive band would be empty"
            )

        if self.budget_restarts < 1:
            issues.append(f"Invalid {ENV_PREFIX}BUDGET_RESTARTS: {self.budget_restarts} (must be >= 1)")

        if self.budget_iters < 0:
            issues.append(f"Invalid {ENV_PREFIX}BUDGET_ITERS: {self.budget_iters} (must be >= 0)")

        if self.dense_cap < 1:
            issues.append(f"Invalid {ENV_PREFIX}DENSE_CAP: {self.dense_cap}")

        if self.jobs is not None and self.jobs < 1:
            issues.append(f"Invalid {ENV_PREFIX}JOBS: {self.jobs} (must be >= 1)")

        return issues


# Global configuration instance
_config: Optional[LabConfig] = None

# Scoped overrides
_tolerance_scale: ContextVar[float] = ContextVar("tolerance_scale", default=1.0)
_precision: ContextVar[str] = ContextVar("precision", default=PRECISION_DOUBLE)


def get_config() -> LabConfig:
    """Get or create the global lab configuration."""
    global _config
    if _config is None:
        _config = LabConfig()
    return _config


def set_config(config: LabConfig) -> None:
    """Set the global lab configuration."""
    global _config
    _config = config


def tolerance_scale() -> float:
    """Current multiplier applied to the psd, support and hermiticity tolerances."""
    return _tolerance_scale.get()


def precision() -> str:
    return _precision.get()


@contextmanager
def tolerance_scope(scale: float) -> Iterator[None]:
    """Multiply clip and support tolerances by ``scale`` inside the block."""
    token = _tolerance_scale.set(_tolerance_scale.get() * scale)
    try:
        yield
    finally:
        _tolerance_scale.reset(token)


@contextmanager
def precision_scope(mode: str) -> Iterator[None]:
    """Route eigensolves through the given precision ('double' or 'extended')."""
    if mode not in (PRECISION_DOUBLE, PRECISION_EXTENDED):
        raise ValueError(f"unknown precision mode: {mode}")
    token = _precision.set(mode)
    try:
        yield
    finally:
        _precision.reset(token)
