"""HTTP surface of the gateway.

Endpoints: POST /intent, GET /audit, GET /epa, GET /health, GET /approvals,
POST /approvals/{id}/approve and /deny. Approval bodies carry the operator
id and a base64 Ed25519 signature over the challenge digest.
"""

from __future__ import annotations

import base64
import binascii
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import hitl
from .epa import build_document_sharing_epa, graph_to_obj
from .firewall import Source
from .gateway import Gateway, IntentRequest
from .registry import UnknownTool


class ContextSegmentIn(BaseModel):
    text: str
    source: Source = Source.USER


class IntentIn(BaseModel):
    intent: str = Field(min_length=1)
    subject_id: str = Field(min_length=1)
    context: list[ContextSegmentIn] = []


class ApprovalIn(BaseModel):
    operator_id: str
    signature: str  # base64 over the challenge digest


_HITL_STATUS = {
    hitl.UnknownChallenge: (404, "UnknownChallenge"),
    hitl.ChallengeExpired: (409, "Expired"),
    hitl.AlreadyTerminal: (409, "AlreadyTerminal"),
    hitl.UnknownOperator: (403, "UnknownOperator"),
    hitl.BadSignature: (403, "BadSignature"),
}


def create_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="intentgate")

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "components": {
                "registry": len(gateway.registry),
                "firewall_patterns": len(gateway.firewall.patterns),
                "policy_rules": len(gateway.policy.rules.allow) + len(gateway.policy.rules.deny),
                "ledger_records": len(gateway.ledger),
                "epa_states": len(gateway.epa_graph.states),
            },
        }

    @app.post("/intent")
    def intent(body: IntentIn):
        request = IntentRequest(
            intent_text=body.intent,
            subject_id=body.subject_id,
            context=tuple((seg.text, seg.source) for seg in body.context),
        )
        try:
            trace = gateway.handle_intent(request)
        except UnknownTool as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return trace.to_obj()

    @app.get("/audit")
    def audit(start: int = 0, end: Optional[int] = None):
        records = gateway.ledger.export(start, end)
        status = gateway.ledger.verify_chain()
        return {
            "records": [r.to_wire() for r in records],
            "chain": {"valid": status.valid, "broken_at": status.broken_at},
        }

    @app.get("/epa")
    def epa(buggy: bool = False):
        if buggy:
            return graph_to_obj(build_document_sharing_epa(buggy=True))
        return graph_to_obj(gateway.epa_graph)

    @app.get("/approvals")
    def approvals():
        gateway.release_expired()
        return {
            "pending": [
                {
                    "challenge_id": c.challenge_id,
                    "tool_name": c.evidence.tool_name,
                    "args": c.evidence.args,
                    "reasoning_trace": c.evidence.reasoning_trace,
                    "digest": c.evidence.digest.hex(),
                    "created_at": c.created_at.isoformat(),
                    "expires_at": c.expires_at.isoformat(),
                    "status": c.status.value,
                }
                for c in gateway.gate.list_pending()
            ]
        }

    @app.post("/approvals/{challenge_id}/approve")
    def approve(challenge_id: str, body: ApprovalIn):
        return _decide(gateway.approve_challenge, challenge_id, body)

    @app.post("/approvals/{challenge_id}/deny")
    def deny(challenge_id: str, body: ApprovalIn):
        return _decide(gateway.deny_challenge, challenge_id, body)

    def _decide(handler, challenge_id: str, body: ApprovalIn):
        gateway.release_expired()
        try:
            signature = base64.b64decode(body.signature, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise HTTPException(status_code=400, detail="signature is not valid base64") from exc
        try:
            return handler(challenge_id, body.operator_id, signature)
        except tuple(_HITL_STATUS) as exc:
            status, label = _HITL_STATUS[type(exc)]
            raise HTTPException(status_code=status, detail=label) from exc

    return app


def serve(gateway: Gateway, host: str = "127.0.0.1", port: int = 8000):
    """Run the API with uvicorn; raises on bind failure."""
    import uvicorn

    uvicorn.run(create_app(gateway), host=host, port=port, log_level="warning")
