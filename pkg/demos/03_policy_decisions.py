"""Walkthrough: deny-by-default policy over the authoritative store.

Ownership comes from the store, never from the caller's arguments, so a
cross-department revoke is denied no matter what the agent claims. Deny
predicates (tainted context, administrator targets, admin lockout)
override any allow rule.
"""

from intentgate.config import fixture_path
from intentgate.policy import AuthoritativeStore, PolicyEngine, load_policies_file
from intentgate.registry import load_registry_file

registry = load_registry_file(fixture_path("tools.json"))
store = AuthoritativeStore.from_file(fixture_path("store.json"))
engine = PolicyEngine(load_policies_file(fixture_path("policy.yaml")), registry)

revoke = {"document_id": "D-8821", "target_user_id": "U-2", "permission_level": "all"}
cases = [
    ("FIN manager, FIN document", "U-FIN-MGR", revoke, False),
    ("same call, tainted context", "U-FIN-MGR", revoke, True),
    ("ENG manager, FIN document (BOLA)", "U-ENG-MGR", revoke, False),
    ("FIN analyst (role too low)", "U-FIN-AN", revoke, False),
    ("target is an administrator", "U-FIN-MGR", {**revoke, "target_user_id": "U-ADMIN-1"}, False),
    ("caller claims ENG ownership", "U-FIN-MGR", {**revoke, "department": "ENG"}, False),
]
for label, subject, args, tainted in cases:
    identity = store.identity_for(subject)
    decision = engine.evaluate(identity, "revoke_document_access", args, tainted, store)
    print(f"{decision.effect.value:5s} {decision.reason.value:25s} {label}")

print("\nthe last case shows authority independence: the hallucinated")
print("'department' claim changed nothing, only the store was consulted.")
