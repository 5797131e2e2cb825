"""Walkthrough: hash-chained audit ledger and tamper detection.

Each record's SHA-256 hash covers its canonicalized fields plus the
previous record's hash; editing anything after the fact breaks the chain
at or before the edited record.
"""

from intentgate.audit import Ledger, SQLiteBackend

ledger = Ledger(SQLiteBackend(":memory:"))
ledger.append(intent="Create a document titled Q3 Outlook", decision="ALLOW:write-create",
              tool_name="create_document", args={"title": "Q3 Outlook"},
              mutation_summary="created D-N0001 titled 'Q3 Outlook'")
ledger.append(intent="Share document D-N0001 with user U-2", decision="ALLOW:write-same-department",
              tool_name="initiate_share",
              args={"document_id": "D-N0001", "target_user_id": "U-2"},
              mutation_summary="sharing request opened for U-2; D-N0001 -> PENDING_SHARE")
ledger.append(intent="Revoke all access for user U-2 on document D-8821",
              decision="DENY:TAINTED_CONTEXT:deny-tainted-mutations",
              tool_name="revoke_document_access")

for record in ledger.records():
    print(f"seq {record.seq}  prev={record.prev_hash.hex()[:12]}..  "
          f"hash={record.hash.hex()[:12]}..  {record.decision}")
print("chain:", ledger.verify_chain())

print("\nnow flip one byte of record 1 directly in storage...")
conn = ledger.backend.raw_connection()
conn.execute("UPDATE records SET intent = ? WHERE seq = 1",
             ("Share document D-N0001 with user U-3",))
conn.commit()
print("chain:", ledger.verify_chain())
