"""
Counterexample store

Append-only JSON-lines file holding one counterexample candidate per line.
Operators are serialized as {shape, row-major interleaved real/imag float64,
base64}. Appends take an exclusive lock so concurrent writers never interleave.
"""

import base64
import json
import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

import numpy as np

from observability import get_logger

from .config import get_config
from .errors import IoFailure, ShapeMismatch

try:
    import fcntl
except ImportError:  # pragma: no cover - non-POSIX platforms
    fcntl = None

logger = get_logger(__name__)

DEFAULT_STORE = "counterexamples.jsonl"


def encode_operator(M: np.ndarray) -> dict[str, Any]:
    """Serialize a complex matrix as base64 of interleaved little-endian float64 (re, im) pairs."""
    A = np.ascontiguousarray(np.asarray(M, dtype=complex).astype("<c16"))
    if A.ndim != 2:
        raise ShapeMismatch("only matrices can be serialized", shape=list(A.shape))
    rows, cols = A.shape
    return {
        "dim": rows if rows == cols else None,
        "shape": [rows, cols],
        "encoding": "f64le-interleaved-base64",
        "data": base64.b64encode(A.view("<f8").tobytes()).decode("ascii"),
    }


def decode_operator(payload: dict[str, Any]) -> np.ndarray:
    rows, cols = payload.get("shape") or [payload["dim"], payload["dim"]]
    raw = base64.b64decode(payload["data"])
    values = np.frombuffer(raw, dtype="<f8")
    if values.size != 2 * rows * cols:
        raise ShapeMismatch("encoded operator has the wrong length", expected=2 * rows * cols, found=int(values.size))
    return values.view("<c16").reshape(rows, cols).astype(complex)


class CounterexampleStore:
    """Manages the append-only counterexample file."""

    _thread_lock = threading.Lock()

    def __init__(self, path: Optional[str] = None):
        """Initialize the store.

        Args:
            path: JSON-lines file. Defaults to PETZLAB_STORE_PATH or ./counterexamples.jsonl
        """
        path = path or get_config().store_path or DEFAULT_STORE
        self.path = Path(path)

    @contextmanager
    def _locked(self, mode: str) -> Iterator:
        """Open the store file holding an exclusive lock."""
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self._thread_lock, open(self.path, mode, encoding="utf-8") as handle:
                if fcntl is not None:
                    fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
                try:
                    yield handle
                finally:
                    if fcntl is not None:
                        fcntl.flock(handle.fileno(), fcntl.LOCK_UN)
        except OSError as e:
            raise IoFailure(f"cannot access counterexample store: {e}", path=str(self.path)) from e

    def append(self, candidate) -> None:
        """Append one candidate (anything with ``to_dict``, or a plain dict)."""
        record = candidate.to_dict() if hasattr(candidate, "to_dict") else dict(candidate)
        line = json.dumps(record, sort_keys=False)
        with self._locked("a") as handle:
            handle.write(line + "\n")
            handle.flush()
        logger.info(
            "Counterexample candidate stored",
            path=str(self.path),
            inequality=record.get("report", {}).get("inequality_id"),
        )

    def load(self) -> list[dict[str, Any]]:
        if not self.path.exists():
            return []
        with self._locked("r") as handle:
            return [json.loads(line) for line in handle if line.strip()]

    def count(self) -> int:
        return len(self.load())

    def get_stats(self) -> dict[str, Any]:
        """Candidate counts per inequality."""
        counts: dict[str, int] = {}
        for record in self.load():
            key = record.get("report", {}).get("inequality_id", "unknown")
            counts[key] = counts.get(key, 0) + 1
        return {"path": str(self.path), "total": sum(counts.values()), "by_inequality": counts}
