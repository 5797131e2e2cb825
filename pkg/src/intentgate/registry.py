"""Catalog of MCP-style tool schemas: tiers, typed arguments, token costs.

The registry is immutable after load; ``register_tool`` returns a new value.
Token costs are a model-free proxy: the whitespace-token count of the
canonically serialized schema object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Optional, Sequence

from .errors import IntentGateError


class Tier(str, Enum):
    READ = "READ"
    WRITE = "WRITE"
    CRITICAL = "CRITICAL"


class InvalidSchema(IntentGateError):
    """Schema violates a structural invariant."""


class DuplicateName(IntentGateError):
    """A different schema is already registered under this name."""


class UnknownTool(IntentGateError):
    """Lookup of a tool name that is not in the registry."""


class ParseError(IntentGateError):
    """Registry document is not well-formed."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ValidationError(IntentGateError):
    """Base class for tool-argument validation failures."""


class MissingRequired(ValidationError):
    def __init__(self, name: str):
        super().__init__(f"missing required parameter: {name}")
        self.param = name


class UnknownParam(ValidationError):
    def __init__(self, name: str):
        super().__init__(f"unknown parameter: {name}")
        self.param = name


class EnumOutOfRange(ValidationError):
    def __init__(self, name: str, value: Any):
        super().__init__(f"parameter {name}: value {value!r} not in declared enum")
        self.param = name
        self.value = value


_PARAM_TYPES = ("string", "enum", "integer", "boolean")


@dataclass(frozen=True)
class ToolParam:
    """One typed argument of a tool.

    ``type`` is one of string/enum/integer/boolean; enum params carry the
    allowed values.
    """

    name: str
    type: str
    required: bool = False
    values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.type not in _PARAM_TYPES:
            raise InvalidSchema(f"param {self.name}: unsupported type {self.type!r}")
        if self.type == "enum" and not self.values:
            raise InvalidSchema(f"param {self.name}: enum must declare values")
        if self.type != "enum" and self.values:
            raise InvalidSchema(f"param {self.name}: only enum params declare values")


@dataclass(frozen=True)
class Annotations:
    destructive: bool = False
    idempotent: bool = False


@dataclass(frozen=True)
class ToolSchema:
    """A semantically described, tiered capability.

    ``token_cost`` is derived from the canonical serialization when not
    supplied and is always >= 1.
    """

    name: str
    title: str
    description: str
    tier: Tier
    params: tuple[ToolParam, ...] = ()
    annotations: Annotations = field(default_factory=Annotations)
    token_cost: int = 0

    def __post_init__(self):
        if not self.name:
            raise InvalidSchema("tool name must be non-empty")
        if not self.description:
            raise InvalidSchema(f"tool {self.name}: description must be non-empty")
        if self.tier is Tier.CRITICAL and not self.annotations.destructive:
            raise InvalidSchema(f"tool {self.name}: CRITICAL tools must be destructive")
        seen = set()
        for p in self.params:
            if p.name in seen:
                raise InvalidSchema(f"tool {self.name}: duplicate param {p.name}")
            seen.add(p.name)
        if self.token_cost == 0:
            object.__setattr__(self, "token_cost", _token_cost(self.to_obj()))
        if self.token_cost < 1:
            raise InvalidSchema(f"tool {self.name}: token_cost must be >= 1")

    def param(self, name: str) -> Optional[ToolParam]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def to_obj(self) -> dict:
        """Canonical JSON-ready object (the external schema shape)."""
        properties = {}
        required = []
        for p in self.params:
            if p.type == "enum":
                properties[p.name] = {"type": "string", "enum": list(p.values)}
            else:
                properties[p.name] = {"type": p.type}
            if p.required:
                required.append(p.name)
        return {
            "name": self.name,
            "title": self.title,
            "description": self.description,
            "tier": self.tier.value,
            "inputSchema": {
                "type": "object",
                "properties": properties,
                "required": required,
            },
            "annotations": {
                "destructiveHint": self.annotations.destructive,
                "idempotentHint": self.annotations.idempotent,
            },
        }


def _token_cost(obj: dict) -> int:
    return max(1, len(json.dumps(obj, indent=2).split()))


def _schema_from_obj(obj: dict) -> ToolSchema:
    try:
        input_schema = obj.get("inputSchema", {})
        required = set(input_schema.get("required", []))
        params = []
        for pname, pspec in input_schema.get("properties", {}).items():
            if "enum" in pspec:
                params.append(
                    ToolParam(pname, "enum", pname in required, tuple(pspec["enum"]))
                )
            else:
                params.append(ToolParam(pname, pspec.get("type", "string"), pname in required))
        ann = obj.get("annotations", {})
        return ToolSchema(
            name=obj["name"],
            title=obj.get("title", obj["name"]),
            description=obj["description"],
            tier=Tier(obj["tier"]),
            params=tuple(params),
            annotations=Annotations(
                destructive=bool(ann.get("destructiveHint", False)),
                idempotent=bool(ann.get("idempotentHint", False)),
            ),
        )
    except KeyError as exc:
        raise InvalidSchema(f"schema object missing key {exc}") from exc
    except ValueError as exc:
        raise InvalidSchema(str(exc)) from exc


@dataclass(frozen=True)
class ToolRegistry:
    """Immutable name -> schema catalog."""

    tools: dict[str, ToolSchema] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.tools)

    def __iter__(self) -> Iterator[ToolSchema]:
        return iter(self.tools.values())

    def __contains__(self, name: str) -> bool:
        return name in self.tools

    def get(self, name: str) -> ToolSchema:
        try:
            return self.tools[name]
        except KeyError:
            raise UnknownTool(name) from None

    def names(self) -> list[str]:
        return sorted(self.tools)

    def by_tier(self, tier: Tier) -> list[ToolSchema]:
        return [s for s in self.tools.values() if s.tier is tier]


def register_tool(registry: ToolRegistry, schema: ToolSchema) -> ToolRegistry:
    """Return a registry containing ``schema``.

    Re-registering an identical schema is a no-op; a different schema under
    an existing name raises DuplicateName.
    """
    existing = registry.tools.get(schema.name)
    if existing is not None:
        if existing == schema:
            return registry
        raise DuplicateName(schema.name)
    tools = dict(registry.tools)
    tools[schema.name] = schema
    return ToolRegistry(tools)


def serialize_registry(registry: ToolRegistry) -> bytes:
    """Canonical external form: JSON array of schema objects, name-sorted."""
    objs = [registry.tools[name].to_obj() for name in sorted(registry.tools)]
    return json.dumps(objs, indent=2).encode("utf-8")


def load_registry(document: bytes) -> ToolRegistry:
    """Parse the external JSON schema list into a registry.

    Unknown keys inside schema objects (e.g. ``execution`` hints or
    ``$schema`` markers) are tolerated and dropped.
    """
    try:
        raw = json.loads(document.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError("document is not UTF-8", exc.start) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.pos) from exc
    if not isinstance(raw, list):
        raise ParseError("top-level value must be a JSON array")
    registry = ToolRegistry()
    for obj in raw:
        if not isinstance(obj, dict):
            raise ParseError("schema entries must be JSON objects")
        registry = register_tool(registry, _schema_from_obj(obj))
    return registry


def load_registry_file(path) -> ToolRegistry:
    with open(path, "rb") as fh:
        return load_registry(fh.read())


def validate_arguments(schema: ToolSchema, args: dict) -> None:
    """Check a call's arguments against the schema; raises on violation.

    Passes iff every required param is present, no unknown params appear,
    and enum values lie within their declared sets.
    """
    declared = {p.name for p in schema.params}
    for name in args:
        if name not in declared:
            raise UnknownParam(name)
    for p in schema.params:
        if p.required and p.name not in args:
            raise MissingRequired(p.name)
        if p.type == "enum" and p.name in args and args[p.name] not in p.values:
            raise EnumOutOfRange(p.name, args[p.name])
