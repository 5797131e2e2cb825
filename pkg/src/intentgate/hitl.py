"""Speculative suspension of critical tool calls behind signed human approval.

A proposed critical call is sealed into an evidence package whose SHA-256
digest covers the tool name, canonical arguments, and the planner's
reasoning trace (length-framed, in that order). Operators approve or deny
by signing that digest with a registered Ed25519 key; approval yields a
single-use resume token bound to the digest.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Callable, Optional

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .encoding import canonical_json, frame
from .errors import IntentGateError

DEFAULT_TTL_SECONDS = 900  # 15 minutes


class ChallengeStatus(str, Enum):
    PENDING = "PENDING"
    APPROVED = "APPROVED"
    DENIED = "DENIED"
    EXPIRED = "EXPIRED"


class UnknownChallenge(IntentGateError):
    pass


class ChallengeExpired(IntentGateError):
    pass


class BadSignature(IntentGateError):
    pass


class UnknownOperator(IntentGateError):
    pass


class AlreadyTerminal(IntentGateError):
    pass


def evidence_digest(tool_name: str, args: dict, reasoning_trace: str) -> bytes:
    payload = frame(
        tool_name.encode(),
        canonical_json(args).encode(),
        reasoning_trace.encode(),
    )
    return hashlib.sha256(payload).digest()


@dataclass(frozen=True)
class EvidencePackage:
    tool_name: str
    args: dict
    reasoning_trace: str
    digest: bytes

    def __post_init__(self):
        expected = evidence_digest(self.tool_name, self.args, self.reasoning_trace)
        if expected != self.digest:
            raise ValueError("evidence digest does not match its fields")

    @classmethod
    def build(cls, tool_name: str, args: dict, reasoning_trace: str) -> "EvidencePackage":
        return cls(
            tool_name, dict(args), reasoning_trace,
            evidence_digest(tool_name, args, reasoning_trace),
        )


@dataclass(frozen=True)
class ApprovalChallenge:
    challenge_id: str
    evidence: EvidencePackage
    created_at: datetime
    expires_at: datetime
    status: ChallengeStatus = ChallengeStatus.PENDING


@dataclass(frozen=True)
class ResumeToken:
    token_id: str
    challenge_id: str
    digest: bytes


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


class ApprovalGate:
    """Challenge store with atomic PENDING -> terminal transitions."""

    def __init__(self, ttl_seconds: int = DEFAULT_TTL_SECONDS,
                 clock: Callable[[], datetime] = _utc_now):
        self.ttl = timedelta(seconds=ttl_seconds)
        self.clock = clock
        self._operators: dict[str, Ed25519PublicKey] = {}
        self._challenges: dict[str, ApprovalChallenge] = {}
        self._tokens: dict[str, ResumeToken] = {}
        self._lock = threading.Lock()

    # -- operator keys ------------------------------------------------------

    def register_operator(self, operator_id: str, public_key_bytes: bytes) -> None:
        self._operators[operator_id] = Ed25519PublicKey.from_public_bytes(public_key_bytes)

    def load_operators(self, entries: list[dict]) -> None:
        """Entries of {"operator_id": ..., "public_key_hex": ...}."""
        for entry in entries:
            self.register_operator(entry["operator_id"], bytes.fromhex(entry["public_key_hex"]))

    # -- challenge lifecycle ------------------------------------------------

    def create_challenge(self, evidence: EvidencePackage) -> ApprovalChallenge:
        now = self.clock()
        challenge = ApprovalChallenge(
            challenge_id=uuid.uuid4().hex,
            evidence=evidence,
            created_at=now,
            expires_at=now + self.ttl,
        )
        with self._lock:
            self._challenges[challenge.challenge_id] = challenge
        return challenge

    def get(self, challenge_id: str) -> ApprovalChallenge:
        challenge = self._challenges.get(challenge_id)
        if challenge is None:
            raise UnknownChallenge(challenge_id)
        return self._expire_if_stale(challenge)

    def list_pending(self) -> list[ApprovalChallenge]:
        """All PENDING challenges; stale entries are flipped to EXPIRED."""
        out = []
        for challenge_id in sorted(self._challenges):
            challenge = self._expire_if_stale(self._challenges[challenge_id])
            if challenge.status is ChallengeStatus.PENDING:
                out.append(challenge)
        return out

    def approve(self, challenge_id: str, operator_id: str, signature: bytes) -> ResumeToken:
        challenge = self._verify_decision(challenge_id, operator_id, signature)
        with self._lock:
            self._transition(challenge, ChallengeStatus.APPROVED)
            token = ResumeToken(secrets.token_hex(16), challenge_id, challenge.evidence.digest)
            self._tokens[token.token_id] = token
        return token

    def deny(self, challenge_id: str, operator_id: str, signature: bytes) -> ApprovalChallenge:
        challenge = self._verify_decision(challenge_id, operator_id, signature)
        with self._lock:
            return self._transition(challenge, ChallengeStatus.DENIED)

    def redeem(self, token: ResumeToken, expected_digest: bytes) -> None:
        """Consume a single-use token; fails on digest mismatch or reuse."""
        with self._lock:
            stored = self._tokens.pop(token.token_id, None)
        if stored is None or stored.digest != expected_digest:
            raise BadSignature("resume token invalid or already used")

    # -- internals ----------------------------------------------------------

    def _verify_decision(self, challenge_id: str, operator_id: str,
                         signature: bytes) -> ApprovalChallenge:
        challenge = self.get(challenge_id)
        if challenge.status is ChallengeStatus.EXPIRED:
            raise ChallengeExpired(challenge_id)
        if challenge.status is not ChallengeStatus.PENDING:
            raise AlreadyTerminal(challenge.status.value)
        key = self._operators.get(operator_id)
        if key is None:
            raise UnknownOperator(operator_id)
        try:
            key.verify(signature, challenge.evidence.digest)
        except InvalidSignature:
            raise BadSignature("signature does not verify over the challenge digest") from None
        return challenge

    def _transition(self, challenge: ApprovalChallenge,
                    status: ChallengeStatus) -> ApprovalChallenge:
        current = self._challenges[challenge.challenge_id]
        if current.status is not ChallengeStatus.PENDING:
            raise AlreadyTerminal(current.status.value)
        updated = replace(current, status=status)
        self._challenges[challenge.challenge_id] = updated
        return updated

    def _expire_if_stale(self, challenge: ApprovalChallenge) -> ApprovalChallenge:
        if challenge.status is ChallengeStatus.PENDING and self.clock() >= challenge.expires_at:
            with self._lock:
                current = self._challenges[challenge.challenge_id]
                if current.status is ChallengeStatus.PENDING:
                    current = replace(current, status=ChallengeStatus.EXPIRED)
                    self._challenges[challenge.challenge_id] = current
                return current
        return challenge


def generate_operator_keypair() -> tuple[Ed25519PrivateKey, bytes]:
    """Fresh signing key plus its raw public bytes (for key registration)."""
    private = Ed25519PrivateKey.generate()
    from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

    public = private.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    return private, public


def sign_digest(private_key: Ed25519PrivateKey, digest: bytes) -> bytes:
    return private_key.sign(digest)
