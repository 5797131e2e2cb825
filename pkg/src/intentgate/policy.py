"""Deterministic deny-by-default authorization of proposed tool calls.

Every decision is derived from the authoritative store, never from
caller-supplied claims. Deny predicates override allow rules regardless of
the order rules appear in the policy file, and absent store objects deny
rather than error (fail-closed).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import IntentGateError
from .registry import Tier, ToolRegistry

ADMINISTRATOR = "Administrator"


class Effect(str, Enum):
    ALLOW = "ALLOW"
    DENY = "DENY"


class Reason(str, Enum):
    # deny reasons, in fixed priority order for deterministic reporting
    TAINTED_CONTEXT = "TAINTED_CONTEXT"
    ADMIN_LOCKOUT = "ADMIN_LOCKOUT"
    ADMIN_TARGET = "ADMIN_TARGET"
    BOLA_DEPARTMENT_MISMATCH = "BOLA_DEPARTMENT_MISMATCH"
    ROLE_MISSING = "ROLE_MISSING"
    NO_MATCHING_ALLOW = "NO_MATCHING_ALLOW"
    ALLOWED_BY_RULE = "ALLOWED_BY_RULE"


_DENY_PRIORITY = [Reason.TAINTED_CONTEXT, Reason.ADMIN_LOCKOUT, Reason.ADMIN_TARGET]


@dataclass(frozen=True)
class PolicyDecision:
    effect: Effect
    reason: Reason
    rule_id: Optional[str] = None

    def __post_init__(self):
        assert (self.effect is Effect.ALLOW) == (self.reason is Reason.ALLOWED_BY_RULE)

    @property
    def allowed(self) -> bool:
        return self.effect is Effect.ALLOW

    def summary(self) -> str:
        tag = f":{self.rule_id}" if self.rule_id else ""
        return f"{self.effect.value}:{self.reason.value}{tag}"


@dataclass(frozen=True)
class AgentIdentity:
    subject_id: str
    roles: frozenset[str]
    department: str


@dataclass
class DocumentRecord:
    department: str
    owner_id: str
    state: str
    title: str = ""


@dataclass
class UserRecord:
    roles: set[str]
    department: str


class AuthoritativeStore:
    """Ground truth for documents and users; lookups never trust the caller."""

    def __init__(self, documents: dict[str, DocumentRecord], users: dict[str, UserRecord]):
        self.documents = documents
        self.users = users
        self._doc_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    @classmethod
    def from_obj(cls, obj: dict) -> "AuthoritativeStore":
        documents = {
            doc_id: DocumentRecord(
                d["department"], d["owner_id"], d.get("state", "INITIAL"), d.get("title", "")
            )
            for doc_id, d in obj.get("documents", {}).items()
        }
        users = {
            user_id: UserRecord(set(u["roles"]), u["department"])
            for user_id, u in obj.get("users", {}).items()
        }
        return cls(documents, users)

    @classmethod
    def from_file(cls, path) -> "AuthoritativeStore":
        import json

        return cls.from_obj(json.loads(Path(path).read_text("utf-8")))

    def document_lock(self, doc_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._doc_locks.setdefault(doc_id, threading.Lock())

    def identity_for(self, subject_id: str) -> "AgentIdentity":
        user = self.users.get(subject_id)
        if user is None:
            raise UnknownSubject(subject_id)
        return AgentIdentity(subject_id, frozenset(user.roles), user.department)

    def administrators(self) -> list[str]:
        return sorted(uid for uid, u in self.users.items() if ADMINISTRATOR in u.roles)


class UnknownSubject(IntentGateError):
    """The calling subject is not present in the authoritative store."""


class PolicyLoadError(IntentGateError):
    """Policy document rejected; message carries the offending line."""


class CyclicHierarchy(PolicyLoadError):
    """Role hierarchy contains a cycle."""


class RoleHierarchy:
    """Acyclic superior -> subordinate relation over role names."""

    def __init__(self, subordinates: dict[str, list[str]]):
        self._subordinates = subordinates
        self._check_acyclic()

    def _check_acyclic(self):
        state: dict[str, int] = {}

        def visit(role: str):
            if state.get(role) == 1:
                raise CyclicHierarchy(f"role hierarchy cycle through {role!r}")
            if state.get(role) == 2:
                return
            state[role] = 1
            for sub in self._subordinates.get(role, []):
                visit(sub)
            state[role] = 2

        for role in self._subordinates:
            visit(role)

    def roles(self) -> set[str]:
        out = set(self._subordinates)
        for subs in self._subordinates.values():
            out.update(subs)
        return out

    def superiors_of(self, role: str) -> set[str]:
        """Roles from which ``role`` is transitively reachable downward."""
        out: set[str] = set()
        changed = True
        while changed:
            changed = False
            for superior, subs in self._subordinates.items():
                if superior in out:
                    continue
                if role in subs or out.intersection(subs):
                    out.add(superior)
                    changed = True
        return out


def role_satisfies(identity: AgentIdentity, required_role: str, hierarchy: RoleHierarchy) -> bool:
    """True iff the identity holds the role or any transitive superior of it."""
    if required_role in identity.roles:
        return True
    return bool(identity.roles & hierarchy.superiors_of(required_role))


@dataclass(frozen=True)
class StoreMatch:
    """Attribute equality between a store object and the identity."""

    store: str  # "documents"
    key_arg: str  # argument carrying the object id
    attribute: str  # e.g. "department"
    equals_identity: str  # identity attribute name

    def normalized(self) -> tuple:
        return ("match", self.store, self.key_arg, self.attribute, self.equals_identity)


@dataclass(frozen=True)
class AllowRule:
    id: str
    tools: tuple[str, ...]
    required_role: str
    where: tuple[StoreMatch, ...] = ()

    def precondition_signature(self) -> tuple:
        return (self.required_role, tuple(sorted(m.normalized() for m in self.where)))


@dataclass(frozen=True)
class DenyRule:
    id: str
    when: str  # tainted_context | target_user_has_role | admin_lockout
    reason: Reason
    tools: tuple[str, ...] = ()  # empty = every tool
    tiers: tuple[Tier, ...] = ()
    user_arg: str = "target_user_id"
    role: str = ADMINISTRATOR

    def applies_to(self, tool_name: str, tier: Tier) -> bool:
        if self.tools and tool_name not in self.tools:
            return False
        if self.tiers and tier not in self.tiers:
            return False
        return True


@dataclass(frozen=True)
class PolicyRuleSet:
    hierarchy: RoleHierarchy
    allow: tuple[AllowRule, ...] = ()
    deny: tuple[DenyRule, ...] = ()

    def allow_rules_for(self, tool_name: str) -> list[AllowRule]:
        return [r for r in self.allow if tool_name in r.tools]


def check_admin_lockout(
    identity: AgentIdentity,
    tool_name: str,
    args: dict,
    store: AuthoritativeStore,
    hierarchy: Optional[RoleHierarchy] = None,
    user_arg: str = "target_user_id",
) -> Optional[PolicyDecision]:
    """Deny a revocation that would remove the last administrator access path.

    Returns the ADMIN_LOCKOUT denial, or None when the call is not a lockout.
    Store lookup failures deny (fail-closed).
    """
    hierarchy = hierarchy or RoleHierarchy({})
    target = args.get(user_arg)
    deny = PolicyDecision(Effect.DENY, Reason.ADMIN_LOCKOUT)
    if target is None or target not in store.users:
        return deny
    if target == identity.subject_id and role_satisfies(identity, ADMINISTRATOR, hierarchy):
        return deny
    admins = store.administrators()
    if admins == [target]:
        return deny
    return None


class PolicyEngine:
    """Evaluates every proposed call against the loaded rule set and store."""

    def __init__(self, rules: PolicyRuleSet, registry: ToolRegistry):
        self.rules = rules
        self.registry = registry

    def evaluate(
        self,
        identity: AgentIdentity,
        tool_name: str,
        args: dict,
        context_tainted: bool,
        store: AuthoritativeStore,
    ) -> PolicyDecision:
        schema = self.registry.get(tool_name)  # raises UnknownTool

        deny_hits: list[tuple[int, str, PolicyDecision]] = []
        for rule in self.rules.deny:
            if not rule.applies_to(tool_name, schema.tier):
                continue
            decision = self._deny_predicate(rule, identity, tool_name, args, context_tainted, store)
            if decision is not None:
                deny_hits.append((_DENY_PRIORITY.index(decision.reason), rule.id, decision))
        if deny_hits:
            return min(deny_hits, key=lambda t: (t[0], t[1]))[2]

        applicable = self.rules.allow_rules_for(tool_name)
        if not applicable:
            return PolicyDecision(Effect.DENY, Reason.NO_MATCHING_ALLOW)

        role_held = False
        satisfied: list[str] = []
        for rule in applicable:
            if not role_satisfies(identity, rule.required_role, self.rules.hierarchy):
                continue
            role_held = True
            if all(self._match_holds(m, identity, args, store) for m in rule.where):
                satisfied.append(rule.id)
        if satisfied:
            return PolicyDecision(Effect.ALLOW, Reason.ALLOWED_BY_RULE, rule_id=min(satisfied))
        if role_held:
            return PolicyDecision(Effect.DENY, Reason.BOLA_DEPARTMENT_MISMATCH)
        return PolicyDecision(Effect.DENY, Reason.ROLE_MISSING)

    def _deny_predicate(
        self,
        rule: DenyRule,
        identity: AgentIdentity,
        tool_name: str,
        args: dict,
        context_tainted: bool,
        store: AuthoritativeStore,
    ) -> Optional[PolicyDecision]:
        if rule.when == "tainted_context":
            if context_tainted:
                return PolicyDecision(Effect.DENY, rule.reason, rule_id=rule.id)
        elif rule.when == "target_user_has_role":
            target = args.get(rule.user_arg)
            user = store.users.get(target) if target is not None else None
            # absent target users deny (fail-closed)
            if user is None or rule.role in user.roles:
                return PolicyDecision(Effect.DENY, rule.reason, rule_id=rule.id)
        elif rule.when == "admin_lockout":
            hit = check_admin_lockout(
                identity, tool_name, args, store, self.rules.hierarchy, rule.user_arg
            )
            if hit is not None:
                return PolicyDecision(Effect.DENY, rule.reason, rule_id=rule.id)
        return None

    @staticmethod
    def _match_holds(
        match: StoreMatch, identity: AgentIdentity, args: dict, store: AuthoritativeStore
    ) -> bool:
        if match.store != "documents":
            return False
        doc_id = args.get(match.key_arg)
        doc = store.documents.get(doc_id) if doc_id is not None else None
        if doc is None:
            return False  # absent objects are never authorizable
        return getattr(doc, match.attribute, None) == getattr(identity, match.equals_identity)


# ---------------------------------------------------------------------------
# Policy file loading (YAML with exact line reporting)
# ---------------------------------------------------------------------------

_LINE_KEY = "__line__"


class _LineLoader(yaml.SafeLoader):
    pass


def _mapping_with_line(loader: _LineLoader, node):
    mapping = loader.construct_mapping(node, deep=True)
    mapping[_LINE_KEY] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _mapping_with_line
)

_ALLOW_KEYS = {"id", "tools", "required_role", "where"}
_WHERE_KEYS = {"store", "key_arg", "attribute", "equals_identity"}
_DENY_KEYS = {"id", "when", "reason", "tools", "tiers", "user_arg", "role"}
_TOP_KEYS = {"roles", "allow", "deny"}
_DENY_PREDICATES = {"tainted_context", "target_user_has_role", "admin_lockout"}


def _reject_unknown(obj: dict, allowed: set[str], where: str):
    unknown = set(obj) - allowed - {_LINE_KEY}
    if unknown:
        raise PolicyLoadError(
            f"line {obj.get(_LINE_KEY, '?')}: unknown key(s) {sorted(unknown)} in {where}"
        )


def load_policies(document: str) -> PolicyRuleSet:
    """Parse the declarative policy document; rejects unknown keys with line numbers."""
    try:
        raw = yaml.load(document, Loader=_LineLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark else "?"
        raise PolicyLoadError(f"line {line}: {exc}") from exc
    if raw is None:
        return PolicyRuleSet(hierarchy=RoleHierarchy({}))
    if not isinstance(raw, dict):
        raise PolicyLoadError("line 1: top level must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "policy document")

    roles_raw = raw.get("roles") or {}
    roles_raw.pop(_LINE_KEY, None)
    hierarchy = RoleHierarchy({role: list(subs or []) for role, subs in roles_raw.items()})
    declared = hierarchy.roles()

    allow_rules = []
    for obj in raw.get("allow") or []:
        _reject_unknown(obj, _ALLOW_KEYS, "allow rule")
        line = obj.get(_LINE_KEY, "?")
        for key in ("id", "tools", "required_role"):
            if key not in obj:
                raise PolicyLoadError(f"line {line}: allow rule missing {key!r}")
        if obj["required_role"] not in declared:
            raise PolicyLoadError(
                f"line {line}: allow rule {obj['id']!r} references undeclared role "
                f"{obj['required_role']!r}"
            )
        where = []
        for w in obj.get("where") or []:
            _reject_unknown(w, _WHERE_KEYS, "where clause")
            wline = w.get(_LINE_KEY, line)
            missing = _WHERE_KEYS - set(w)
            if missing:
                raise PolicyLoadError(f"line {wline}: where clause missing {sorted(missing)}")
            where.append(StoreMatch(w["store"], w["key_arg"], w["attribute"], w["equals_identity"]))
        allow_rules.append(
            AllowRule(obj["id"], tuple(obj["tools"]), obj["required_role"], tuple(where))
        )

    deny_rules = []
    for obj in raw.get("deny") or []:
        _reject_unknown(obj, _DENY_KEYS, "deny rule")
        line = obj.get(_LINE_KEY, "?")
        for key in ("id", "when", "reason"):
            if key not in obj:
                raise PolicyLoadError(f"line {line}: deny rule missing {key!r}")
        if obj["when"] not in _DENY_PREDICATES:
            raise PolicyLoadError(f"line {line}: unknown deny predicate {obj['when']!r}")
        try:
            reason = Reason(obj["reason"])
        except ValueError:
            raise PolicyLoadError(f"line {line}: unknown reason {obj['reason']!r}") from None
        if reason not in _DENY_PRIORITY:
            raise PolicyLoadError(f"line {line}: {reason.value} is not a deny reason")
        role = obj.get("role", ADMINISTRATOR)
        if obj["when"] == "target_user_has_role" and role not in declared:
            raise PolicyLoadError(
                f"line {line}: deny rule {obj['id']!r} references undeclared role {role!r}"
            )
        try:
            tiers = tuple(Tier(t) for t in obj.get("tiers") or ())
        except ValueError as exc:
            raise PolicyLoadError(f"line {line}: {exc}") from None
        deny_rules.append(
            DenyRule(
                id=obj["id"],
                when=obj["when"],
                reason=reason,
                tools=tuple(obj.get("tools") or ()),
                tiers=tiers,
                user_arg=obj.get("user_arg", "target_user_id"),
                role=role,
            )
        )

    return PolicyRuleSet(hierarchy=hierarchy, allow=tuple(allow_rules), deny=tuple(deny_rules))


def load_policies_file(path) -> PolicyRuleSet:
    return load_policies(Path(path).read_text("utf-8"))
