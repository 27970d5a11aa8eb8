"""On-disk cache of calibration artifacts (correction factors, alpha*).

Records live in one JSON-lines file, one record per line with explicit
field names. A record is immutable: writing a different value under an
existing key raises :class:`StoreConflict`.
"""

from __future__ import annotations

import fcntl
import json
import os
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import __version__

__all__ = [
    "SEED_POLICY_VERSION",
    "DEFAULT_CACHE_DIR",
    "CalibrationRecord",
    "CalibrationStore",
    "StoreConflict",
    "CalibrationFailed",
    "canonical_key",
    "default_cache_dir",
]

SEED_POLICY_VERSION = 1
DEFAULT_CACHE_DIR = ".spc-cache"
_FILENAME = "calibration.jsonl"

Calibrator = Callable[[dict], float]


class StoreConflict(RuntimeError):
    pass


class CalibrationFailed(RuntimeError):
    def __init__(self, key: dict, cause: BaseException):
        super().__init__(f"calibration failed for {canonical_key(key)}: {cause}")
        self.key = key
        self.__cause__ = cause


def canonical_key(key: dict) -> str:
    return json.dumps(key, sort_keys=True, separators=(",", ":"))


def default_cache_dir() -> Path:
    return Path(os.environ.get("SPC_CACHE_DIR", DEFAULT_CACHE_DIR))


@dataclass(frozen=True)
class CalibrationRecord:
    key: dict
    value: float
    created: str
    version: str

    def to_line(self) -> str:
        return json.dumps(
            {"key": self.key, "value": self.value, "created": self.created, "version": self.version},
            sort_keys=True,
        )

    @classmethod
    def from_line(cls, line: str) -> "CalibrationRecord":
        d = json.loads(line)
        return cls(d["key"], float(d["value"]), d["created"], d["version"])


class CalibrationStore:
    """Key/value store of calibrated reals with get-or-compute semantics."""

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.path = self.directory / _FILENAME
        self._lock = threading.RLock()
        self._calibrators: dict[str, Calibrator] = {}

    def register(self, artifact: str, calibrator: Calibrator) -> None:
        self._calibrators[artifact] = calibrator

    @contextmanager
    def _locked(self):
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            fh = open(self.directory / (_FILENAME + ".lock"), "a")
        except OSError as exc:
            raise OSError(f"calibration store {self.directory} is not writable: {exc}") from exc
        with self._lock, fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def _load(self) -> dict[str, CalibrationRecord]:
        records: dict[str, CalibrationRecord] = {}
        if not self.path.exists():
            return records
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rec = CalibrationRecord.from_line(line)
                    records[canonical_key(rec.key)] = rec
        return records

    def get(self, key: dict) -> CalibrationRecord | None:
        return self._load().get(canonical_key(key))

    def records(self) -> list[CalibrationRecord]:
        return list(self._load().values())

    def _append(self, key: dict, value: float) -> CalibrationRecord:
        value = float(value)
        if not value > 0.0:
            raise ValueError(f"calibrated values must be positive, got {value}")
        existing = self._load().get(canonical_key(key))
        if existing is not None:
            if existing.value != value:
                raise StoreConflict(
                    f"record {canonical_key(key)} already holds {existing.value!r}, refusing {value!r}"
                )
            return existing
        rec = CalibrationRecord(
            key=json.loads(canonical_key(key)),
            value=value,
            created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            version=__version__,
        )
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(rec.to_line() + "\n")
        return rec

    def put(self, key: dict, value: float) -> CalibrationRecord:
        with self._locked():
            return self._append(key, value)

    def get_or_calibrate(self, key: dict, calibrator: Calibrator | None = None) -> CalibrationRecord:
        """Cached record for ``key``, calibrating and persisting it on a miss.

        The store lock is held while calibrating, so concurrent callers for
        the same key run the calibrator once.
        """
        rec = self.get(key)
        if rec is not None:
            return rec
        if calibrator is None:
            artifact = key.get("artifact")
            if artifact not in self._calibrators:
                raise KeyError(f"no calibrator registered for artifact {artifact!r}")
            calibrator = self._calibrators[artifact]
        with self._locked():
            rec = self._load().get(canonical_key(key))
            if rec is not None:
                return rec
            try:
                value = calibrator(key)
            except Exception as exc:
                raise CalibrationFailed(key, exc) from exc
            return self._append(key, value)
