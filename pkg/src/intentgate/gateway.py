"""End-to-end pipeline: intake -> firewall -> routing/cache -> planning ->
policy -> approval gate -> execution -> audit.

The planner's output is never trusted: every step is re-validated against
the registry, evaluated by the policy engine with context taint applied,
and (for critical tools) suspended behind a signed human approval. A step
that is denied is audited and never executed; store mutations happen only
inside the executor, serialized per document.
"""

from __future__ import annotations

import hashlib
import itertools
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from . import router
from .audit import Ledger
from .encoding import canonical_json
from .epa import EPAGraph, build_document_sharing_epa
from .errors import IntentGateError
from .firewall import Firewall, FirewallVerdict, Source, context_is_tainted, ingest_context
from .hitl import ApprovalGate, BadSignature, ChallengeStatus, EvidencePackage, evidence_digest
from .planner import NoPlanFound, Planner, PlanStep
from .policy import AgentIdentity, AuthoritativeStore, DocumentRecord, Effect, PolicyDecision, PolicyEngine, UnknownSubject
from .registry import Tier, ToolRegistry, ToolSchema, ValidationError, validate_arguments


class RunStatus(str, Enum):
    COMPLETED = "COMPLETED"
    BLOCKED = "BLOCKED"  # stopped at the firewall
    SUSPENDED = "SUSPENDED"  # waiting on human approval
    FAILED = "FAILED"  # stage error, audited terminal denial


@dataclass(frozen=True)
class IntentRequest:
    intent_text: str
    subject_id: str
    context: tuple[tuple[str, Source], ...] = ()

    def __post_init__(self):
        if not self.intent_text:
            raise ValueError("intent_text must be non-empty")


@dataclass(frozen=True)
class ExecutionResult:
    ok: bool
    detail: str


@dataclass(frozen=True)
class StepOutcome:
    step: PlanStep
    decision: PolicyDecision
    execution: Optional[ExecutionResult]
    challenge_id: Optional[str]
    audit_seq: int

    def __post_init__(self):
        if self.decision.effect is Effect.DENY:
            assert self.execution is None, "denied steps never execute"


@dataclass
class PipelineTrace:
    status: RunStatus
    intent_text: str
    firewall_verdict: FirewallVerdict
    tainted: bool
    routed: list[tuple[str, float]] = field(default_factory=list)
    cache_hit: bool = False
    plan: list[PlanStep] = field(default_factory=list)
    steps: list[StepOutcome] = field(default_factory=list)
    audit_seqs: list[int] = field(default_factory=list)
    challenge_id: Optional[str] = None
    error: Optional[str] = None

    def to_obj(self) -> dict:
        return {
            "status": self.status.value,
            "intent": self.intent_text,
            "firewall": {
                "allowed": self.firewall_verdict.allowed,
                "reason": self.firewall_verdict.reason.value,
                "matched_pattern": self.firewall_verdict.matched_pattern,
            },
            "tainted": self.tainted,
            "routed": [{"tool": name, "similarity": sim} for name, sim in self.routed],
            "cache_hit": self.cache_hit,
            "plan": [
                {"tool": s.tool_name, "args": s.args, "rationale": s.rationale}
                for s in self.plan
            ],
            "steps": [
                {
                    "tool": o.step.tool_name,
                    "args": o.step.args,
                    "decision": o.decision.summary(),
                    "execution": None
                    if o.execution is None
                    else {"ok": o.execution.ok, "detail": o.execution.detail},
                    "challenge_id": o.challenge_id,
                    "audit_seq": o.audit_seq,
                }
                for o in self.steps
            ],
            "audit_seqs": self.audit_seqs,
            "challenge_id": self.challenge_id,
            "error": self.error,
        }


class ToolExecutor:
    """Applies allowed calls to the authoritative store.

    Workflow tools advance a document through the sharing lifecycle graph;
    a call whose precondition state does not hold fails without mutating.
    """

    _WORKFLOW_TOOLS = {"initiate_share", "accept_sharing_request", "revoke_document_access"}

    def __init__(self, store: AuthoritativeStore, workflow: Optional[EPAGraph] = None):
        self.store = store
        self.workflow = workflow or build_document_sharing_epa(buggy=False)
        self._doc_counter = itertools.count(1)
        self._create_lock = threading.Lock()

    def execute(self, identity: AgentIdentity, schema: ToolSchema, args: dict) -> ExecutionResult:
        handler = getattr(self, f"_do_{schema.name}", None)
        if handler is None:
            return ExecutionResult(False, f"no executor bound for tool {schema.name}")
        return handler(identity, args)

    # -- mutations ----------------------------------------------------------

    def _do_create_document(self, identity, args):
        with self._create_lock:
            doc_id = f"D-N{next(self._doc_counter):04d}"
            self.store.documents[doc_id] = DocumentRecord(
                department=identity.department,
                owner_id=identity.subject_id,
                state="DOC_CREATED",
                title=args.get("title", ""),
            )
        return ExecutionResult(True, f"created {doc_id} titled {args.get('title', '')!r}")

    def _advance(self, tool: str, doc_id: str, detail: str) -> ExecutionResult:
        doc = self.store.documents.get(doc_id)
        if doc is None:
            return ExecutionResult(False, f"unknown document {doc_id}")
        with self.store.document_lock(doc_id):
            nxt = self.workflow.step(doc.state, tool) if doc.state in self.workflow.states else None
            if nxt is None:
                return ExecutionResult(False, f"{tool} not enabled while {doc_id} is {doc.state}")
            doc.state = nxt
        return ExecutionResult(True, f"{detail}; {doc_id} -> {nxt}")

    def _do_initiate_share(self, identity, args):
        return self._advance(
            "initiate_share",
            args["document_id"],
            f"sharing request opened for {args.get('target_user_id', '?')}",
        )

    def _do_accept_sharing_request(self, identity, args):
        return self._advance(
            "accept_sharing_request", args["document_id"], "sharing request accepted"
        )

    def _do_revoke_document_access(self, identity, args):
        return self._advance(
            "revoke_document_access",
            args["document_id"],
            f"revoked {args.get('permission_level', '?')} access of {args.get('target_user_id', '?')}",
        )

    def _do_update_document_metadata(self, identity, args):
        doc_id = args["document_id"]
        doc = self.store.documents.get(doc_id)
        if doc is None:
            return ExecutionResult(False, f"unknown document {doc_id}")
        with self.store.document_lock(doc_id):
            if "title" in args:
                doc.title = args["title"]
        return ExecutionResult(True, f"metadata updated on {doc_id}")

    def _do_delete_document(self, identity, args):
        doc_id = args["document_id"]
        with self.store.document_lock(doc_id):
            if self.store.documents.pop(doc_id, None) is None:
                return ExecutionResult(False, f"unknown document {doc_id}")
        return ExecutionResult(True, f"deleted {doc_id}")

    # -- reads (no store mutation) -------------------------------------------

    def _do_read_document(self, identity, args):
        doc = self.store.documents.get(args["document_id"])
        if doc is None:
            return ExecutionResult(False, f"unknown document {args['document_id']}")
        return ExecutionResult(True, f"read {args['document_id']} (state {doc.state})")

    def _do_list_documents(self, identity, args):
        names = sorted(
            doc_id
            for doc_id, d in self.store.documents.items()
            if d.department == identity.department
        )
        return ExecutionResult(True, f"{len(names)} documents: {', '.join(names) or 'none'}")

    def _do_search_documents(self, identity, args):
        query = args.get("query", "").lower()
        hits = sorted(
            doc_id
            for doc_id, d in self.store.documents.items()
            if d.department == identity.department and query in d.title.lower()
        )
        return ExecutionResult(True, f"matches: {', '.join(hits) or 'none'}")

    def _do_get_document_permissions(self, identity, args):
        doc = self.store.documents.get(args["document_id"])
        if doc is None:
            return ExecutionResult(False, f"unknown document {args['document_id']}")
        return ExecutionResult(True, f"owner {doc.owner_id}; department {doc.department}")

    def _do_list_sharing_requests(self, identity, args):
        pending = sorted(
            doc_id
            for doc_id, d in self.store.documents.items()
            if d.department == identity.department and d.state == "PENDING_SHARE"
        )
        return ExecutionResult(True, f"pending: {', '.join(pending) or 'none'}")

    def _do_get_user_profile(self, identity, args):
        user = self.store.users.get(args["user_id"])
        if user is None:
            return ExecutionResult(False, f"unknown user {args['user_id']}")
        return ExecutionResult(True, f"roles {sorted(user.roles)}; department {user.department}")


@dataclass
class _SuspendedStep:
    identity: AgentIdentity
    schema: ToolSchema
    step: PlanStep
    intent_text: str


class Gateway:
    """Wires the pipeline stages together and owns all cross-request state."""

    def __init__(
        self,
        registry: ToolRegistry,
        firewall: Firewall,
        policy_engine: PolicyEngine,
        store: AuthoritativeStore,
        ledger: Ledger,
        planner: Planner,
        gate: ApprovalGate,
        epa_graph: Optional[EPAGraph] = None,
        similarity_threshold: float = router.DEFAULT_SIMILARITY_THRESHOLD,
        token_budget: int = router.DEFAULT_TOKEN_BUDGET,
        cache_capacity: int = router.DEFAULT_CACHE_CAPACITY,
    ):
        self.registry = registry
        self.firewall = firewall
        self.policy = policy_engine
        self.store = store
        self.ledger = ledger
        self.planner = planner
        self.gate = gate
        self.epa_graph = epa_graph or build_document_sharing_epa(buggy=False)
        self.executor = ToolExecutor(store, workflow=self.epa_graph)
        self.index = router.build_index(registry)
        self.similarity_threshold = similarity_threshold
        self.token_budget = token_budget
        self.cache_capacity = cache_capacity
        self._caches: dict[str, router.CognitiveCache] = {}
        self._suspended: dict[str, _SuspendedStep] = {}
        self._suspend_lock = threading.Lock()

    # -- pipeline -------------------------------------------------------------

    def handle_intent(self, request: IntentRequest) -> PipelineTrace:
        intent = request.intent_text
        segments = ingest_context(request.context)
        tainted = context_is_tainted(segments)
        verdict = self.firewall.screen_intent(intent)
        trace = PipelineTrace(
            status=RunStatus.COMPLETED,
            intent_text=intent,
            firewall_verdict=verdict,
            tainted=tainted,
        )

        if not verdict.allowed:
            record = self.ledger.append(
                intent=intent,
                decision=f"DENY:FIREWALL:{verdict.reason.value}",
                mutation_summary="DENIED",
            )
            trace.status = RunStatus.BLOCKED
            trace.audit_seqs.append(record.seq)
            return trace

        try:
            identity = self.store.identity_for(request.subject_id)
        except UnknownSubject:
            return self._terminal_denial(trace, "DENY:UNKNOWN_SUBJECT", request.subject_id)

        intent_vector = router.embed(self.index, intent)
        cache = self._cache_for(identity.subject_id)
        # tainted requests never touch the cache: a cached ALLOW must not
        # shortcut the taint denial (and tainted runs are never inserted)
        entry = None if tainted else cache.lookup(intent_vector, self.similarity_threshold)
        if entry is not None:
            cached: PipelineTrace = entry.response
            record = self.ledger.append(
                intent=intent, decision="ALLOW:CACHE_HIT", mutation_summary="CACHE_SERVED"
            )
            served = replace_trace(cached, cache_hit=True, audit_seqs=[record.seq])
            served.intent_text = intent
            return served

        sims = router.similarities(self.index, intent_vector)
        routed = router.select_tools(self.index, intent_vector, self.token_budget)
        trace.routed = [(name, sims[name]) for name in routed]
        if not routed:
            return self._terminal_denial(trace, "DENY:NO_TOOLS_ROUTED", intent)

        try:
            plan = self.planner.plan(intent, routed)
        except NoPlanFound:
            return self._terminal_denial(trace, "DENY:NO_PLAN", intent)
        trace.plan = plan
        plan_digest = hashlib.sha256(
            canonical_json(
                [{"tool": s.tool_name, "args": s.args, "rationale": s.rationale} for s in plan]
            ).encode()
        ).digest()

        for step in plan:
            if step.tool_name not in routed:
                return self._terminal_denial(
                    trace, "DENY:PLAN_TOOL_NOT_ROUTED", step.tool_name, plan_digest
                )

        for step in plan:
            schema = self.registry.get(step.tool_name)
            try:
                validate_arguments(schema, step.args)
            except ValidationError as exc:
                return self._terminal_denial(
                    trace, f"DENY:INVALID_ARGS:{type(exc).__name__}", str(exc), plan_digest
                )
            decision = self.policy.evaluate(identity, step.tool_name, step.args, tainted, self.store)
            if decision.effect is Effect.DENY:
                record = self.ledger.append(
                    intent=intent,
                    decision=decision.summary(),
                    tool_name=step.tool_name,
                    args=step.args,
                    mutation_summary="DENIED",
                    plan_digest=plan_digest,
                )
                trace.steps.append(StepOutcome(step, decision, None, None, record.seq))
                trace.audit_seqs.append(record.seq)
                continue
            if schema.tier is Tier.CRITICAL:
                evidence = EvidencePackage.build(step.tool_name, step.args, step.rationale)
                challenge = self.gate.create_challenge(evidence)
                with self._suspend_lock:
                    self._suspended[challenge.challenge_id] = _SuspendedStep(
                        identity, schema, step, intent
                    )
                record = self.ledger.append(
                    intent=intent,
                    decision=f"{decision.summary()};SUSPENDED:{challenge.challenge_id}",
                    tool_name=step.tool_name,
                    args=step.args,
                    mutation_summary="SUSPENDED",
                    plan_digest=plan_digest,
                )
                trace.steps.append(
                    StepOutcome(step, decision, None, challenge.challenge_id, record.seq)
                )
                trace.audit_seqs.append(record.seq)
                trace.status = RunStatus.SUSPENDED
                trace.challenge_id = challenge.challenge_id
                return trace
            result = self.executor.execute(identity, schema, step.args)
            record = self.ledger.append(
                intent=intent,
                decision=decision.summary(),
                tool_name=step.tool_name,
                args=step.args,
                mutation_summary=result.detail if result.ok else f"EXECUTION_FAILED:{result.detail}",
                plan_digest=plan_digest,
            )
            trace.steps.append(StepOutcome(step, decision, result, None, record.seq))
            trace.audit_seqs.append(record.seq)

        if trace.status is RunStatus.COMPLETED and not tainted:
            cache.insert(intent_vector, trace, time.time())
        return trace

    # -- approval resolution ----------------------------------------------------

    def approve_challenge(self, challenge_id: str, operator_id: str, signature: bytes) -> dict:
        token = self.gate.approve(challenge_id, operator_id, signature)
        with self._suspend_lock:
            suspended = self._suspended.pop(challenge_id, None)
        if suspended is None:
            record = self.ledger.append(
                intent="", decision=f"ALLOW:APPROVED_BY:{operator_id}",
                mutation_summary="NO_SUSPENDED_RUN",
            )
            return {"status": ChallengeStatus.APPROVED.value, "audit_seq": record.seq,
                    "execution": None}
        digest = evidence_digest(
            suspended.schema.name, suspended.step.args, suspended.step.rationale
        )
        try:
            self.gate.redeem(token, digest)
        except BadSignature:
            record = self.ledger.append(
                intent=suspended.intent_text,
                decision="DENY:EVIDENCE_DIGEST_MISMATCH",
                tool_name=suspended.schema.name,
                args=suspended.step.args,
                mutation_summary="DENIED",
            )
            return {"status": "REJECTED", "audit_seq": record.seq, "execution": None}
        result = self.executor.execute(suspended.identity, suspended.schema, suspended.step.args)
        record = self.ledger.append(
            intent=suspended.intent_text,
            decision=f"ALLOW:APPROVED_BY:{operator_id}",
            tool_name=suspended.schema.name,
            args=suspended.step.args,
            mutation_summary=result.detail if result.ok else f"EXECUTION_FAILED:{result.detail}",
        )
        return {
            "status": ChallengeStatus.APPROVED.value,
            "audit_seq": record.seq,
            "execution": {"ok": result.ok, "detail": result.detail},
        }

    def deny_challenge(self, challenge_id: str, operator_id: str, signature: bytes) -> dict:
        self.gate.deny(challenge_id, operator_id, signature)
        with self._suspend_lock:
            suspended = self._suspended.pop(challenge_id, None)
        record = self.ledger.append(
            intent=suspended.intent_text if suspended else "",
            decision=f"DENY:HUMAN_DENIED:{operator_id}",
            tool_name=suspended.schema.name if suspended else "",
            args=suspended.step.args if suspended else {},
            mutation_summary="DENIED",
        )
        return {"status": ChallengeStatus.DENIED.value, "audit_seq": record.seq}

    def release_expired(self) -> list[str]:
        """Terminate suspended runs whose challenge has expired (audited)."""
        released = []
        with self._suspend_lock:
            pending_ids = list(self._suspended)
        for challenge_id in pending_ids:
            challenge = self.gate.get(challenge_id)
            if challenge.status is not ChallengeStatus.EXPIRED:
                continue
            with self._suspend_lock:
                suspended = self._suspended.pop(challenge_id, None)
            if suspended is None:
                continue
            self.ledger.append(
                intent=suspended.intent_text,
                decision="DENY:CHALLENGE_EXPIRED",
                tool_name=suspended.schema.name,
                args=suspended.step.args,
                mutation_summary="DENIED",
            )
            released.append(challenge_id)
        return released

    # -- helpers ----------------------------------------------------------------

    def _cache_for(self, subject_id: str) -> router.CognitiveCache:
        cache = self._caches.get(subject_id)
        if cache is None:
            cache = self._caches.setdefault(
                subject_id, router.CognitiveCache(self.cache_capacity)
            )
        return cache

    def _terminal_denial(
        self, trace: PipelineTrace, decision: str, detail: str, plan_digest: bytes = b""
    ) -> PipelineTrace:
        record = self.ledger.append(
            intent=trace.intent_text,
            decision=decision,
            mutation_summary="DENIED",
            plan_digest=plan_digest or hashlib.sha256(b"").digest(),
        )
        trace.status = RunStatus.FAILED
        trace.error = f"{decision}: {detail}"
        trace.audit_seqs.append(record.seq)
        return trace


def replace_trace(trace: PipelineTrace, **changes) -> PipelineTrace:
    clone = PipelineTrace(
        status=trace.status,
        intent_text=trace.intent_text,
        firewall_verdict=trace.firewall_verdict,
        tainted=trace.tainted,
        routed=list(trace.routed),
        cache_hit=trace.cache_hit,
        plan=list(trace.plan),
        steps=list(trace.steps),
        audit_seqs=list(trace.audit_seqs),
        challenge_id=trace.challenge_id,
        error=trace.error,
    )
    for key, value in changes.items():
        setattr(clone, key, value)
    return clone
