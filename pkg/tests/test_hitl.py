from datetime import datetime, timedelta, timezone

import pytest

from intentgate.hitl import (
    AlreadyTerminal,
    ApprovalGate,
    BadSignature,
    ChallengeExpired,
    ChallengeStatus,
    EvidencePackage,
    UnknownChallenge,
    UnknownOperator,
    evidence_digest,
    generate_operator_keypair,
    sign_digest,
)

ARGS = {"document_id": "D-8821", "target_user_id": "U-2", "permission_level": "all"}


class ManualClock:
    def __init__(self):
        self.now = datetime(2026, 1, 1, tzinfo=timezone.utc)

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += timedelta(seconds=seconds)


@pytest.fixture
def gate():
    return ApprovalGate(ttl_seconds=900, clock=ManualClock())


@pytest.fixture
def operator(gate):
    private, public = generate_operator_keypair()
    gate.register_operator("op-1", public)
    return private


def make_evidence():
    return EvidencePackage.build("revoke_document_access", ARGS, "step 1: revoke")


class TestEvidencePackage:
    def test_digest_recomputation_matches(self):
        evidence = make_evidence()
        assert evidence.digest == evidence_digest(
            evidence.tool_name, evidence.args, evidence.reasoning_trace
        )

    def test_mismatched_digest_rejected(self):
        with pytest.raises(ValueError):
            EvidencePackage("t", {}, "r", b"\x00" * 32)

    def test_any_field_change_changes_digest(self):
        base = make_evidence()
        for variant in (
            EvidencePackage.build("other_tool", ARGS, "step 1: revoke"),
            EvidencePackage.build("revoke_document_access", {**ARGS, "permission_level": "read"}, "step 1: revoke"),
            EvidencePackage.build("revoke_document_access", ARGS, "step 2: different"),
        ):
            assert variant.digest != base.digest


class TestChallengeLifecycle:
    def test_critical_call_creates_pending_challenge(self, gate):
        challenge = gate.create_challenge(make_evidence())
        assert challenge.status is ChallengeStatus.PENDING
        assert challenge.expires_at - challenge.created_at == timedelta(seconds=900)

    def test_identical_evidence_distinct_ids(self, gate):
        a = gate.create_challenge(make_evidence())
        b = gate.create_challenge(make_evidence())
        assert a.challenge_id != b.challenge_id

    def test_approve_with_valid_signature(self, gate, operator):
        challenge = gate.create_challenge(make_evidence())
        token = gate.approve(
            challenge.challenge_id, "op-1", sign_digest(operator, challenge.evidence.digest)
        )
        assert gate.get(challenge.challenge_id).status is ChallengeStatus.APPROVED
        assert token.digest == challenge.evidence.digest
        gate.redeem(token, challenge.evidence.digest)
        with pytest.raises(BadSignature):
            gate.redeem(token, challenge.evidence.digest)  # single use

    def test_signature_over_wrong_digest_rejected(self, gate, operator):
        challenge = gate.create_challenge(make_evidence())
        wrong = sign_digest(operator, b"\xab" * 32)
        with pytest.raises(BadSignature):
            gate.approve(challenge.challenge_id, "op-1", wrong)
        assert gate.get(challenge.challenge_id).status is ChallengeStatus.PENDING

    def test_approve_after_expiry(self, gate, operator):
        challenge = gate.create_challenge(make_evidence())
        gate.clock.advance(901)
        with pytest.raises(ChallengeExpired):
            gate.approve(
                challenge.challenge_id, "op-1", sign_digest(operator, challenge.evidence.digest)
            )
        assert gate.get(challenge.challenge_id).status is ChallengeStatus.EXPIRED

    def test_unknown_operator(self, gate, operator):
        challenge = gate.create_challenge(make_evidence())
        with pytest.raises(UnknownOperator):
            gate.approve(
                challenge.challenge_id, "nobody", sign_digest(operator, challenge.evidence.digest)
            )

    def test_unknown_challenge(self, gate, operator):
        with pytest.raises(UnknownChallenge):
            gate.approve("missing", "op-1", b"sig")

    def test_deny_flow(self, gate, operator):
        challenge = gate.create_challenge(make_evidence())
        denied = gate.deny(
            challenge.challenge_id, "op-1", sign_digest(operator, challenge.evidence.digest)
        )
        assert denied.status is ChallengeStatus.DENIED

    def test_deny_of_approved_is_terminal(self, gate, operator):
        challenge = gate.create_challenge(make_evidence())
        signature = sign_digest(operator, challenge.evidence.digest)
        gate.approve(challenge.challenge_id, "op-1", signature)
        with pytest.raises(AlreadyTerminal):
            gate.deny(challenge.challenge_id, "op-1", signature)

    def test_digest_binding_blocks_tampered_redeem(self, gate, operator):
        challenge = gate.create_challenge(make_evidence())
        token = gate.approve(
            challenge.challenge_id, "op-1", sign_digest(operator, challenge.evidence.digest)
        )
        tampered = evidence_digest("revoke_document_access", {**ARGS, "target_user_id": "U-9"}, "step 1: revoke")
        with pytest.raises(BadSignature):
            gate.redeem(token, tampered)


class TestListPending:
    def test_empty(self, gate):
        assert gate.list_pending() == []

    def test_one_pending_one_approved(self, gate, operator):
        first = gate.create_challenge(make_evidence())
        gate.create_challenge(make_evidence())
        gate.approve(first.challenge_id, "op-1", sign_digest(operator, first.evidence.digest))
        pending = gate.list_pending()
        assert len(pending) == 1
        assert pending[0].status is ChallengeStatus.PENDING

    def test_stale_entries_flipped_to_expired(self, gate):
        challenge = gate.create_challenge(make_evidence())
        gate.clock.advance(1000)
        assert gate.list_pending() == []
        assert gate.get(challenge.challenge_id).status is ChallengeStatus.EXPIRED
