"""Canonical byte encodings shared by the audit ledger and the approval gate.

Two records with different field values must never serialize to the same
byte string, so every field is framed with an 8-byte big-endian length
prefix before concatenation.
"""

from __future__ import annotations

import json
from typing import Any


def canonical_json(value: Any) -> str:
    """Deterministic JSON: sorted keys, no insignificant whitespace."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def frame(*fields: bytes) -> bytes:
    """Length-prefix each field and concatenate (injective over field tuples)."""
    out = bytearray()
    for field in fields:
        out += len(field).to_bytes(8, "big")
        out += field
    return bytes(out)
