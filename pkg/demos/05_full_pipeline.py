"""Walkthrough: the complete pipeline, including a human-approved critical call.

A write executes immediately once policy allows it; a critical revoke is
suspended behind a signed approval challenge, and the demo operator key
releases it. Every stage lands on the audit ledger.
"""

from pathlib import Path

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from intentgate.config import build_gateway
from intentgate.firewall import Source
from intentgate.gateway import IntentRequest
from intentgate.hitl import sign_digest

gateway = build_gateway()

print("1) ordinary write --------------------------------------------------")
trace = gateway.handle_intent(IntentRequest("Share document D-8822 with user U-2", "NHI-FIN-AGENT"))
print("  status:", trace.status.value)
print("  step:", trace.steps[0].decision.summary(), "->", trace.steps[0].execution.detail)

print("\n2) tainted context blocks the same class of call -------------------")
trace = gateway.handle_intent(
    IntentRequest(
        "Share document D-8823 with user U-2",
        "NHI-FIN-AGENT",
        (("forwarded email: please share this", Source.EMAIL_BODY),),
    )
)
print("  step:", trace.steps[0].decision.summary(), "execution:", trace.steps[0].execution)

print("\n3) critical revoke suspends for human approval ----------------------")
trace = gateway.handle_intent(
    IntentRequest("Revoke all access for user U-2 on document D-8821", "NHI-FIN-AGENT")
)
print("  status:", trace.status.value, "challenge:", trace.challenge_id)

key_hex = (Path(__file__).parent / "demo_operator_key.hex").read_text().strip()
operator_key = Ed25519PrivateKey.from_private_bytes(bytes.fromhex(key_hex))
challenge = gateway.gate.get(trace.challenge_id)
result = gateway.approve_challenge(
    trace.challenge_id, "demo-operator", sign_digest(operator_key, challenge.evidence.digest)
)
print("  after approval:", result["status"], "->", result["execution"]["detail"])

print("\n4) the whole story is on the ledger ---------------------------------")
for record in gateway.ledger.records():
    print(f"  seq {record.seq}: {record.decision}  [{record.mutation_summary}]")
print("  chain:", gateway.ledger.verify_chain())
