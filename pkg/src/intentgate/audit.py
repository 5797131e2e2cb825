"""Append-only, hash-chained ledger of pipeline decisions.

Each record's SHA-256 hash covers a canonical, length-framed serialization
of all its fields plus the previous record's hash, so any retroactive edit
is detectable. Appends are strictly serialized; verification and export
observe a consistent prefix.
"""

from __future__ import annotations

import dataclasses
import hashlib
import sqlite3
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Iterable, Optional, Protocol

from .encoding import canonical_json, frame
from .errors import IntentGateError

GENESIS = b"\x00" * 32
EMPTY_PLAN_DIGEST = hashlib.sha256(b"").digest()


class PersistenceFailure(IntentGateError):
    pass


class RangeOutOfBounds(IntentGateError):
    pass


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    timestamp: str  # ISO-8601 UTC
    intent: str
    plan_digest: bytes
    decision: str
    tool_name: str
    args_json: str
    mutation_summary: str
    prev_hash: bytes
    hash: bytes

    def preimage(self) -> bytes:
        return frame(
            str(self.seq).encode(),
            self.timestamp.encode(),
            self.intent.encode(),
            self.plan_digest,
            self.decision.encode(),
            self.tool_name.encode(),
            self.args_json.encode(),
            self.mutation_summary.encode(),
            self.prev_hash,
        )

    def compute_hash(self) -> bytes:
        return hashlib.sha256(self.preimage()).digest()

    def to_wire(self) -> dict:
        """JSON shape served over the audit endpoint."""
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "intent": self.intent,
            "plan_digest": self.plan_digest.hex(),
            "decision": self.decision,
            "tool_name": self.tool_name,
            "args": self.args_json,
            "mutation_summary": self.mutation_summary,
            "prev_hash": self.prev_hash.hex(),
            "hash": self.hash.hex(),
        }


@dataclass(frozen=True)
class ChainStatus:
    valid: bool
    broken_at: Optional[int] = None

    def __str__(self) -> str:
        return "Valid" if self.valid else f"BrokenAt({self.broken_at})"


class LedgerBackend(Protocol):
    """Minimal append/scan persistence contract; backends are swappable."""

    def append_row(self, record: AuditRecord) -> None: ...

    def scan(self) -> Iterable[AuditRecord]: ...

    def count(self) -> int: ...


class SQLiteBackend:
    """Single-file embedded store (":memory:" for ephemeral ledgers)."""

    def __init__(self, path: str = ":memory:"):
        self.path = path
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute(
            """CREATE TABLE IF NOT EXISTS records (
                   seq INTEGER PRIMARY KEY,
                   timestamp TEXT NOT NULL,
                   intent TEXT NOT NULL,
                   plan_digest BLOB NOT NULL,
                   decision TEXT NOT NULL,
                   tool_name TEXT NOT NULL,
                   args TEXT NOT NULL,
                   mutation TEXT NOT NULL,
                   prev_hash BLOB NOT NULL,
                   hash BLOB NOT NULL
               )"""
        )
        self._conn.commit()

    def append_row(self, r: AuditRecord) -> None:
        try:
            self._conn.execute(
                "INSERT INTO records VALUES (?,?,?,?,?,?,?,?,?,?)",
                (
                    r.seq,
                    r.timestamp,
                    r.intent,
                    r.plan_digest,
                    r.decision,
                    r.tool_name,
                    r.args_json,
                    r.mutation_summary,
                    r.prev_hash,
                    r.hash,
                ),
            )
            self._conn.commit()
        except sqlite3.Error as exc:
            raise PersistenceFailure(str(exc)) from exc

    def scan(self) -> list[AuditRecord]:
        rows = self._conn.execute(
            "SELECT seq, timestamp, intent, plan_digest, decision, tool_name,"
            " args, mutation, prev_hash, hash FROM records ORDER BY seq"
        ).fetchall()
        return [AuditRecord(*row) for row in rows]

    def count(self) -> int:
        (n,) = self._conn.execute("SELECT COUNT(*) FROM records").fetchone()
        return n

    def raw_connection(self) -> sqlite3.Connection:
        return self._conn


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class Ledger:
    """Hash-chained audit ledger; appends are single-writer."""

    def __init__(self, backend: Optional[LedgerBackend] = None,
                 clock: Callable[[], datetime] = _utc_now):
        self.backend = backend or SQLiteBackend()
        self.clock = clock
        self._lock = threading.Lock()
        tail = self.backend.scan()
        self._seq = len(tail)
        self._last_hash = tail[-1].hash if tail else GENESIS

    def append(
        self,
        intent: str,
        decision: str,
        tool_name: str = "",
        args: Optional[dict] = None,
        mutation_summary: str = "DENIED",
        plan_digest: bytes = EMPTY_PLAN_DIGEST,
    ) -> AuditRecord:
        with self._lock:
            record = AuditRecord(
                seq=self._seq,
                timestamp=self.clock().isoformat(),
                intent=intent,
                plan_digest=plan_digest,
                decision=decision,
                tool_name=tool_name,
                args_json=canonical_json(args or {}),
                mutation_summary=mutation_summary,
                prev_hash=self._last_hash,
                hash=b"",
            )
            record = dataclasses.replace(record, hash=record.compute_hash())
            self.backend.append_row(record)
            self._seq += 1
            self._last_hash = record.hash
            return record

    def __len__(self) -> int:
        return self.backend.count()

    def records(self) -> list[AuditRecord]:
        return list(self.backend.scan())

    def verify_chain(self) -> ChainStatus:
        """Recompute every hash and linkage; report the first violation."""
        prev = GENESIS
        for i, record in enumerate(self.backend.scan()):
            if record.seq != i:
                return ChainStatus(False, i)
            if record.prev_hash != prev:
                return ChainStatus(False, i)
            if record.compute_hash() != record.hash:
                return ChainStatus(False, i)
            prev = record.hash
        return ChainStatus(True)

    def export(self, start: int = 0, end: Optional[int] = None) -> list[AuditRecord]:
        """Records with seq in [start, end); end defaults to the tail."""
        records = self.backend.scan()
        if end is None:
            end = len(records)
        if start < 0 or end > len(records) or start > end:
            raise RangeOutOfBounds(f"[{start}, {end}) outside [0, {len(records)})")
        return records[start:end]
