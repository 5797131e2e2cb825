from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings, strategies as st

from intentgate.audit import (
    EMPTY_PLAN_DIGEST,
    GENESIS,
    Ledger,
    RangeOutOfBounds,
    SQLiteBackend,
)


def fixed_clock(start="2026-01-01T00:00:00+00:00"):
    current = datetime.fromisoformat(start)

    def tick():
        nonlocal current
        current += timedelta(seconds=1)
        return current

    return tick


@pytest.fixture
def ledger():
    return Ledger(SQLiteBackend(":memory:"), clock=fixed_clock())


class TestAppend:
    def test_first_record_is_genesis_linked(self, ledger):
        record = ledger.append(intent="hello", decision="ALLOW:x")
        assert record.seq == 0
        assert record.prev_hash == GENESIS

    def test_second_links_to_first(self, ledger):
        first = ledger.append(intent="a", decision="ALLOW:x")
        second = ledger.append(intent="b", decision="ALLOW:x")
        assert second.prev_hash == first.hash

    def test_deny_recorded_like_allow(self, ledger):
        allow = ledger.append(intent="a", decision="ALLOW:rule", tool_name="t",
                              mutation_summary="did it")
        deny = ledger.append(intent="b", decision="DENY:TAINTED_CONTEXT", tool_name="t")
        assert deny.seq == allow.seq + 1
        assert deny.mutation_summary == "DENIED"
        assert ledger.verify_chain().valid

    def test_hash_covers_all_fields(self, ledger):
        record = ledger.append(intent="a", decision="ALLOW:x", tool_name="t",
                               args={"k": "v"}, mutation_summary="m")
        assert record.compute_hash() == record.hash


class TestVerifyChain:
    def test_empty_ledger_valid(self, ledger):
        assert ledger.verify_chain().valid

    def test_ten_records_valid(self, ledger):
        for i in range(10):
            ledger.append(intent=f"i{i}", decision="ALLOW:x")
        status = ledger.verify_chain()
        assert status.valid and status.broken_at is None

    def test_tampering_intent_detected_at_index(self, ledger):
        for i in range(10):
            ledger.append(intent=f"i{i}", decision="ALLOW:x")
        conn = ledger.backend.raw_connection()
        conn.execute("UPDATE records SET intent = ? WHERE seq = 4", ("i4X",))
        conn.commit()
        status = ledger.verify_chain()
        assert not status.valid
        assert status.broken_at == 4

    def test_valid_after_every_append(self, ledger):
        for i in range(12):
            ledger.append(intent=f"i{i}", decision="DENY:x" if i % 3 else "ALLOW:x")
            assert ledger.verify_chain().valid

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 9), st.sampled_from(["intent", "decision", "mutation", "prev_hash"]))
    def test_single_field_tamper_always_detected(self, index, column):
        ledger = Ledger(SQLiteBackend(":memory:"), clock=fixed_clock())
        for i in range(10):
            ledger.append(intent=f"i{i}", decision="ALLOW:x", mutation_summary=f"m{i}")
        conn = ledger.backend.raw_connection()
        if column == "prev_hash":
            conn.execute(
                "UPDATE records SET prev_hash = ? WHERE seq = ?", (b"\x01" * 32, index)
            )
        else:
            conn.execute(
                f"UPDATE records SET {column} = ? WHERE seq = ?", ("tampered", index)
            )
        conn.commit()
        status = ledger.verify_chain()
        assert not status.valid
        assert status.broken_at <= index + 1


class TestExport:
    def test_full_range(self, ledger):
        for i in range(5):
            ledger.append(intent=f"i{i}", decision="ALLOW:x")
        assert [r.seq for r in ledger.export()] == [0, 1, 2, 3, 4]

    def test_empty_range(self, ledger):
        ledger.append(intent="a", decision="ALLOW:x")
        assert ledger.export(1, 1) == []

    def test_beyond_tail_rejected(self, ledger):
        ledger.append(intent="a", decision="ALLOW:x")
        with pytest.raises(RangeOutOfBounds):
            ledger.export(0, 2)

    def test_wire_shape(self, ledger):
        record = ledger.append(intent="a", decision="ALLOW:x", args={"z": 1})
        wire = record.to_wire()
        assert wire["hash"] == record.hash.hex()
        assert wire["prev_hash"] == GENESIS.hex()
        assert "T" in wire["timestamp"]  # ISO-8601
        assert wire["plan_digest"] == EMPTY_PLAN_DIGEST.hex()


class TestCanonicalSerialization:
    def test_distinct_records_distinct_preimages(self, ledger):
        a = ledger.append(intent="ab", decision="c")
        b = ledger.append(intent="a", decision="bc")
        assert a.preimage() != b.preimage()

    def test_field_shift_does_not_collide(self):
        # "x" + "yz" must not frame identically to "xy" + "z"
        ledger = Ledger(SQLiteBackend(":memory:"), clock=fixed_clock())
        r1 = ledger.append(intent="x", decision="yz")
        ledger2 = Ledger(SQLiteBackend(":memory:"), clock=fixed_clock())
        r2 = ledger2.append(intent="xy", decision="z")
        assert r1.preimage() != r2.preimage()
        assert r1.hash != r2.hash

    def test_persistence_across_reopen(self, tmp_path):
        path = str(tmp_path / "ledger.db")
        ledger = Ledger(SQLiteBackend(path), clock=fixed_clock())
        for i in range(3):
            ledger.append(intent=f"i{i}", decision="ALLOW:x")
        reopened = Ledger(SQLiteBackend(path))
        assert reopened.verify_chain().valid
        new = reopened.append(intent="later", decision="ALLOW:x")
        assert new.seq == 3
        assert reopened.verify_chain().valid
