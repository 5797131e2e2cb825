"""Plan synthesis from intents.

The default planner is a deterministic template table: each entry maps an
intent pattern (regex with named groups) to a list of tool-call steps whose
argument slots are filled from the match. A network-backed planner client
with the same signature can be swapped in via config; either way the
produced plan is only a suggestion and faces full downstream validation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Sequence

from .errors import IntentGateError


class NoPlanFound(IntentGateError):
    """No template matched the intent."""


@dataclass(frozen=True)
class PlanStep:
    tool_name: str
    args: dict
    rationale: str


class Planner(Protocol):
    def plan(self, intent_text: str, routed_tools: Sequence[str]) -> list[PlanStep]: ...


_SLOT = re.compile(r"\{([a-zA-Z_][a-zA-Z0-9_]*)\}")


@dataclass(frozen=True)
class PlanTemplate:
    pattern: re.Pattern
    steps: tuple[dict, ...]

    def instantiate(self, match: re.Match) -> list[PlanStep]:
        groups = {k: (v or "").strip() for k, v in match.groupdict().items()}

        def fill(value):
            if isinstance(value, str):
                return _SLOT.sub(lambda m: groups.get(m.group(1), m.group(0)), value)
            return value

        return [
            PlanStep(
                tool_name=step["tool"],
                args={k: fill(v) for k, v in step.get("args", {}).items()},
                rationale=fill(step.get("rationale", "")),
            )
            for step in self.steps
        ]


class TemplatePlanner:
    """Deterministic intent-pattern -> plan-template planner."""

    def __init__(self, templates: Sequence[PlanTemplate]):
        self.templates = list(templates)

    @classmethod
    def from_obj(cls, entries: list[dict]) -> "TemplatePlanner":
        templates = [
            PlanTemplate(re.compile(e["pattern"], re.IGNORECASE), tuple(e["steps"]))
            for e in entries
        ]
        return cls(templates)

    @classmethod
    def from_file(cls, path) -> "TemplatePlanner":
        return cls.from_obj(json.loads(Path(path).read_text("utf-8")))

    def plan(self, intent_text: str, routed_tools: Sequence[str]) -> list[PlanStep]:
        for template in self.templates:
            match = template.pattern.search(intent_text)
            if match:
                return template.instantiate(match)
        raise NoPlanFound(intent_text)


class HTTPPlannerClient:
    """External planner speaking JSON over HTTP; outputs face the same
    validation as the template planner's."""

    def __init__(self, base_url: str, client=None, timeout: float = 10.0):
        import httpx

        self.client = client or httpx.Client(base_url=base_url, timeout=timeout)

    def plan(self, intent_text: str, routed_tools: Sequence[str]) -> list[PlanStep]:
        response = self.client.post(
            "/plan", json={"intent": intent_text, "tools": list(routed_tools)}
        )
        if response.status_code == 404:
            raise NoPlanFound(intent_text)
        response.raise_for_status()
        return parse_plan_response(response.json())


def parse_plan_response(payload: dict) -> list[PlanStep]:
    steps = payload.get("steps")
    if not isinstance(steps, list) or not steps:
        raise NoPlanFound("planner returned no steps")
    return [
        PlanStep(
            tool_name=s["tool"],
            args=dict(s.get("args", {})),
            rationale=str(s.get("rationale", "")),
        )
        for s in steps
    ]
