"""Append-only, hash-chained audit log.

One JSON object per line. Each entry's `entry_hash` is the SHA-256 of the
canonical JSON of all its other fields (which include `prev_hash`), and
`prev_hash` repeats the previous entry's hash; the genesis entry chains
from 64 zero digits. Any byte changed anywhere in a stored entry therefore
breaks verification exactly at that entry's sequence.

Appends go through a single lock and each line is written, flushed, and
fsynced as one unit: an entry is either fully on disk and chain-valid or
absent.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from .wire import canonical_json, sha256_hex

GENESIS_HASH = "0" * 64


class AuditError(RuntimeError):
    pass


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    first_broken_sequence: int | None = None
    detail: str = ""
    entries: int = 0


def _entry_hash(entry: dict) -> str:
    material = {k: v for k, v in entry.items() if k != "entry_hash"}
    return sha256_hex(material)


class AuditLog:
    """Single-writer audit log over a JSON-lines file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._sequence = 0
        self._last_hash = GENESIS_HASH
        if self.path.exists():
            self._resume()

    def _resume(self) -> None:
        for line_number, line in enumerate(self.path.read_bytes().splitlines(), start=1):
            try:
                entry = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise AuditError(
                    f"existing audit log is unreadable at line {line_number}: {exc}"
                ) from exc
            self._sequence = entry["sequence"]
            self._last_hash = entry["entry_hash"]

    def append(self, record: dict) -> dict:
        """Append one entry; `record` supplies the payload fields (status,
        digest, scores, encodings, timestamp). Returns the stored entry."""
        with self._lock:
            entry = dict(record)
            entry["sequence"] = self._sequence + 1
            entry["prev_hash"] = self._last_hash
            entry["entry_hash"] = _entry_hash(entry)
            line = canonical_json(entry) + "\n"
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line)
                handle.flush()
                os.fsync(handle.fileno())
            self._sequence = entry["sequence"]
            self._last_hash = entry["entry_hash"]
            return entry

    def read_range(self, start: int, end: int) -> list[dict]:
        """Entries with start <= sequence <= end; out-of-bounds ranges just
        come back empty."""
        if not self.path.exists():
            return []
        selected = []
        with open(self.path, "r", encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                entry = json.loads(line)
                if start <= entry["sequence"] <= end:
                    selected.append(entry)
        return selected

    @property
    def sequence(self) -> int:
        return self._sequence


def verify_log(path: str | Path) -> VerificationResult:
    """Recompute every hash link; report the first broken sequence.

    Position k in the file must hold sequence k, chain from the previous
    entry's hash, and hash to its stored entry_hash. An unparseable or
    undecodable line breaks at its position.
    """
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return VerificationResult(ok=True, entries=0, detail="empty log")
    prev_hash = GENESIS_HASH
    position = 0
    for raw in path.read_bytes().splitlines():
        position += 1
        try:
            entry = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return VerificationResult(
                ok=False, first_broken_sequence=position, detail="unparseable entry", entries=position
            )
        if not isinstance(entry, dict) or entry.get("sequence") != position:
            return VerificationResult(
                ok=False,
                first_broken_sequence=position,
                detail=f"expected sequence {position}, found {entry.get('sequence')!r}",
                entries=position,
            )
        if entry.get("prev_hash") != prev_hash:
            return VerificationResult(
                ok=False, first_broken_sequence=position, detail="previous-hash link broken", entries=position
            )
        try:
            recomputed = _entry_hash(entry)
        except ValueError:
            return VerificationResult(
                ok=False, first_broken_sequence=position, detail="entry not canonicalizable", entries=position
            )
        if recomputed != entry.get("entry_hash"):
            return VerificationResult(
                ok=False, first_broken_sequence=position, detail="entry hash mismatch", entries=position
            )
        prev_hash = entry["entry_hash"]
    return VerificationResult(ok=True, entries=position)
