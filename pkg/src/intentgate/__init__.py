"""Zero-trust intent gateway for autonomous agents.

A stochastic planner may only suggest tool calls; execution requires the
deterministic policy engine to allow, the critical tier to clear a signed
human approval, and everything lands on a hash-chained audit ledger. The
fuzzer subpackage explores the enabled-tool graph for unauthorized
transitions.
"""

from .audit import AuditRecord, ChainStatus, Ledger, SQLiteBackend
from .config import GatewayConfig, build_gateway
from .epa import (
    NO_SHARING_OVERWRITE,
    AbstractState,
    EPAGraph,
    ForbiddenTransition,
    Invariant,
    build_document_sharing_epa,
    compare,
    export_dot,
)
from .firewall import Firewall, FirewallVerdict, Source, context_is_tainted, ingest_context
from .fuzzer import FuzzConfig, FuzzReport, breach_probability, run_campaign
from .gateway import Gateway, IntentRequest, PipelineTrace, RunStatus
from .hitl import ApprovalGate, EvidencePackage, generate_operator_keypair, sign_digest
from .planner import PlanStep, TemplatePlanner
from .policy import (
    AgentIdentity,
    AuthoritativeStore,
    PolicyDecision,
    PolicyEngine,
    check_admin_lockout,
    load_policies,
    role_satisfies,
)
from .registry import (
    Tier,
    ToolRegistry,
    ToolSchema,
    load_registry,
    register_tool,
    serialize_registry,
    validate_arguments,
)
from .router import (
    CognitiveCache,
    RoutingIndex,
    TermVector,
    build_index,
    cosine_similarity,
    embed,
    select_tools,
)

__version__ = "0.1.0"
