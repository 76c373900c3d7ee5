"""
Exception capture for petzlab runs, forwarded to Sentry when it is enabled.

petzlab errors carry their own context (dimensions, residuals, offending
paths) and an exit code. Both are attached to the captured event; the exit
code also picks the severity, so that a bad flag is a warning while a proved
inequality reported violated is fatal.
"""

from functools import wraps
from typing import Any, Callable, Optional

from .config import get_config
from .logger import get_logger

logger = get_logger(__name__)

RELEASE = "petzlab@0.1.0"

# exit code -> Sentry level
SEVERITY = {1: "warning", 2: "warning", 3: "fatal"}


def _error_context(error: BaseException) -> dict[str, Any]:
    to_dict = getattr(error, "to_dict", None)
    if not callable(to_dict):
        return {}
    context = {k: v for k, v in to_dict().items() if k not in ("error_type", "message")}
    exit_code = getattr(error, "exit_code", None)
    if exit_code is not None:
        context["exit_code"] = exit_code
    return context


def severity(error: BaseException) -> str:
    return SEVERITY.get(getattr(error, "exit_code", None), "error")


class ErrorTracker:
    """Logs captured exceptions and mirrors them to Sentry when configured."""

    def __init__(self):
        config = get_config()
        self.sentry = None
        if not config.sentry_enabled:
            return
        try:
            import sentry_sdk
        except ImportError:
            logger.warning("sentry-sdk not installed, error tracking disabled")
            return
        try:
            sentry_sdk.init(
                dsn=config.sentry_dsn,
                environment=config.environment,
                traces_sample_rate=config.sentry_traces_sample_rate,
                release=RELEASE,
                server_name=config.service_name,
                send_default_pii=False,
            )
        except Exception as e:
            logger.error("Failed to initialize Sentry", error=str(e))
            return
        self.sentry = sentry_sdk
        logger.info("Sentry initialized", environment=config.environment)

    def capture_exception(
        self,
        error: BaseException,
        context: Optional[dict[str, Any]] = None,
        level: Optional[str] = None,
    ) -> Optional[str]:
        """
        Log an exception with its context and forward it to Sentry.

        Args:
            error: The exception to capture
            context: Extra fields (component, function, ...) merged over the error's own
            level: Sentry level; derived from the error's exit code when omitted

        Returns:
            Sentry event id, or None when Sentry is disabled
        """
        context = {**_error_context(error), **(context or {})}
        level = level or severity(error)
        logger.error(
            f"{type(error).__name__}: {error}",
            error_type=type(error).__name__,
            severity=level,
            **context,
        )
        if self.sentry is None:
            return None

        with self.sentry.push_scope() as scope:
            scope.level = level
            for key in ("component", "function", "exit_code"):
                if key in context:
                    scope.set_tag(key, str(context[key]))
            scope.set_context("petzlab", context)
            return self.sentry.capture_exception(error)


_tracker: Optional[ErrorTracker] = None


def get_error_tracker() -> ErrorTracker:
    global _tracker
    if _tracker is None:
        _tracker = ErrorTracker()
    return _tracker


def init_error_tracking() -> None:
    get_error_tracker()


def capture_exception(
    error: BaseException,
    context: Optional[dict[str, Any]] = None,
    level: Optional[str] = None,
) -> Optional[str]:
    """Capture an exception through the global tracker."""
    return get_error_tracker().capture_exception(error, context, level)


def with_error_tracking(context: Optional[dict[str, Any]] = None, reraise: bool = True):
    """
    Capture any exception escaping the decorated function, then re-raise it.

    Usage:
        @with_error_tracking(context={"component": "campaign"})
        def run_campaign(config):
            ...
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as e:
                capture_exception(e, {"function": func.__name__, **(context or {})})
                if reraise:
                    raise
                return None

        return wrapper

    return decorator
