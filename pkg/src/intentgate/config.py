"""Configuration loading and gateway assembly.

Paths and ports can be overridden by environment variables
(INTENTGATE_<FIELD> uppercased, e.g. INTENTGATE_PORT, INTENTGATE_STORE_PATH).
Unset paths fall back to the packaged fixtures.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Optional

from . import router
from .audit import Ledger, SQLiteBackend
from .epa import build_document_sharing_epa, load_graph_file
from .firewall import Firewall
from .gateway import Gateway
from .hitl import DEFAULT_TTL_SECONDS, ApprovalGate
from .planner import HTTPPlannerClient, TemplatePlanner
from .policy import AuthoritativeStore, PolicyEngine, load_policies_file
from .registry import load_registry_file

_ENV_PREFIX = "INTENTGATE_"


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("intentgate.fixtures").joinpath(name)))


@dataclass
class GatewayConfig:
    registry_path: str = ""
    policy_path: str = ""
    store_path: str = ""
    patterns_path: str = ""
    planner_path: str = ""
    graph_path: str = ""
    operators_path: str = ""
    ledger_path: str = ":memory:"
    similarity_threshold: float = router.DEFAULT_SIMILARITY_THRESHOLD
    token_budget: int = router.DEFAULT_TOKEN_BUDGET
    cache_capacity: int = router.DEFAULT_CACHE_CAPACITY
    challenge_ttl_seconds: int = DEFAULT_TTL_SECONDS
    planner_url: Optional[str] = None
    host: str = "127.0.0.1"
    port: int = 8000

    def __post_init__(self):
        defaults = {
            "registry_path": "tools.json",
            "policy_path": "policy.yaml",
            "store_path": "store.json",
            "patterns_path": "firewall_patterns.txt",
            "planner_path": "planner.json",
            "graph_path": "epa_document_sharing.json",
            "operators_path": "operators.json",
        }
        for name, fixture in defaults.items():
            if not getattr(self, name):
                setattr(self, name, str(fixture_path(fixture)))
        self._apply_env()

    def _apply_env(self):
        for f in fields(self):
            raw = os.environ.get(_ENV_PREFIX + f.name.upper())
            if raw is None:
                continue
            if f.type in ("int", int):
                setattr(self, f.name, int(raw))
            elif f.type in ("float", float):
                setattr(self, f.name, float(raw))
            else:
                setattr(self, f.name, raw)

    @classmethod
    def from_file(cls, path) -> "GatewayConfig":
        data = json.loads(Path(path).read_text("utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**data)


def build_gateway(config: Optional[GatewayConfig] = None) -> Gateway:
    config = config or GatewayConfig()
    registry = load_registry_file(config.registry_path)
    firewall = Firewall.from_file(config.patterns_path)
    rules = load_policies_file(config.policy_path)
    store = AuthoritativeStore.from_file(config.store_path)
    ledger = Ledger(SQLiteBackend(config.ledger_path))
    if config.planner_url:
        planner = HTTPPlannerClient(config.planner_url)
    else:
        planner = TemplatePlanner.from_file(config.planner_path)
    gate = ApprovalGate(ttl_seconds=config.challenge_ttl_seconds)
    operators_file = Path(config.operators_path)
    if operators_file.exists():
        gate.load_operators(json.loads(operators_file.read_text("utf-8")))
    graph_file = Path(config.graph_path)
    epa_graph = (
        load_graph_file(graph_file) if graph_file.exists() else build_document_sharing_epa()
    )
    return Gateway(
        registry=registry,
        firewall=firewall,
        policy_engine=PolicyEngine(rules, registry),
        store=store,
        ledger=ledger,
        planner=planner,
        gate=gate,
        epa_graph=epa_graph,
        similarity_threshold=config.similarity_threshold,
        token_budget=config.token_budget,
        cache_capacity=config.cache_capacity,
    )
