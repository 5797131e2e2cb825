"""Pre-inference intent screening and taint tracking of untrusted context.

Pattern matching is content-based: text is NFC-normalized and searched
case-insensitively, and trailing whitespace never changes a verdict.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import IntentGateError

DEFAULT_MAX_CHARS = 4000


class Source(str, Enum):
    USER = "USER"
    EMAIL_BODY = "EMAIL_BODY"
    EXTERNAL = "EXTERNAL"
    SYSTEM = "SYSTEM"


TAINTED_SOURCES = frozenset({Source.EMAIL_BODY, Source.EXTERNAL})


class VerdictReason(str, Enum):
    CLEAN = "CLEAN"
    INJECTION_PATTERN = "INJECTION_PATTERN"
    EXCESSIVE_LENGTH = "EXCESSIVE_LENGTH"


@dataclass(frozen=True)
class ContextSegment:
    text: str
    source_tag: Source
    tainted: bool


@dataclass(frozen=True)
class FirewallVerdict:
    allowed: bool
    matched_pattern: Optional[str]
    reason: VerdictReason

    def __post_init__(self):
        assert self.allowed == (self.reason is VerdictReason.CLEAN)


class PatternFileError(IntentGateError):
    """Pattern fixture contains an invalid regular expression."""


class Firewall:
    """Screens intents against a fixed injection-pattern set plus a length bound."""

    def __init__(self, patterns: Sequence[tuple[str, str]], max_chars: int = DEFAULT_MAX_CHARS):
        self.max_chars = max_chars
        self.patterns = []
        for pattern_id, source in patterns:
            try:
                self.patterns.append((pattern_id, re.compile(source, re.IGNORECASE)))
            except re.error as exc:
                raise PatternFileError(f"pattern {pattern_id}: {exc}") from exc

    @classmethod
    def from_file(cls, path, max_chars: int = DEFAULT_MAX_CHARS) -> "Firewall":
        """Load one pattern per line; ``#`` starts a comment line."""
        patterns = []
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            patterns.append((f"P{lineno:02d}", stripped))
        return cls(patterns, max_chars=max_chars)

    def screen_intent(self, text: str) -> FirewallVerdict:
        normalized = unicodedata.normalize("NFC", text)
        if len(normalized.rstrip()) > self.max_chars:
            return FirewallVerdict(False, None, VerdictReason.EXCESSIVE_LENGTH)
        for pattern_id, regex in self.patterns:
            if regex.search(normalized):
                return FirewallVerdict(False, pattern_id, VerdictReason.INJECTION_PATTERN)
        return FirewallVerdict(True, None, VerdictReason.CLEAN)


def ingest_context(segments: Iterable[tuple[str, Source]]) -> list[ContextSegment]:
    """Tag raw context segments; EMAIL_BODY and EXTERNAL sources are tainted."""
    return [
        ContextSegment(text, tag, tainted=tag in TAINTED_SOURCES)
        for text, tag in segments
    ]


def context_is_tainted(segments: Iterable[ContextSegment]) -> bool:
    return any(seg.tainted for seg in segments)
