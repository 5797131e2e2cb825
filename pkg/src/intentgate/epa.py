"""Enabled-tool abstraction graphs.

Abstract states are labeled by the set of tools currently enabled; a
transition records how invoking a tool moves between those enabledness
classes. The transition relation is a partial function: at most one edge
per (state, tool) pair, so stepping is total and deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

from .errors import IntentGateError

Edge = tuple[str, str, str]  # (from_label, tool, to_label)


class UnknownState(IntentGateError):
    pass


class GraphError(IntentGateError):
    """Graph definition violates a structural invariant."""


@dataclass(frozen=True)
class AbstractState:
    label: str
    enabled: frozenset[str]


@dataclass(frozen=True)
class ForbiddenTransition:
    """Pattern over (from, tool, to); None is a wildcard."""

    from_label: Optional[str] = None
    tool: Optional[str] = None
    to_label: Optional[str] = None

    def matches(self, edge: Edge) -> bool:
        return (
            (self.from_label is None or self.from_label == edge[0])
            and (self.tool is None or self.tool == edge[1])
            and (self.to_label is None or self.to_label == edge[2])
        )


@dataclass(frozen=True)
class Invariant:
    name: str
    forbidden: tuple[ForbiddenTransition, ...]

    def violated_by(self, edge: Edge) -> bool:
        return any(p.matches(edge) for p in self.forbidden)


NO_SHARING_OVERWRITE = Invariant(
    "NoSharingOverwrite",
    (ForbiddenTransition("SHARING_WITH_THIRD_PARTY", "accept_sharing_request", None),),
)


class EPAGraph:
    def __init__(
        self,
        states: Iterable[AbstractState],
        initial: str,
        transitions: Iterable[Edge],
        buggy: bool = False,
        buggy_edges: Iterable[Edge] = (),
        name: str = "epa",
    ):
        self.states: dict[str, AbstractState] = {}
        for state in states:
            if state.label in self.states:
                raise GraphError(f"duplicate state label {state.label!r}")
            self.states[state.label] = state
        if initial not in self.states:
            raise GraphError(f"initial state {initial!r} not declared")
        self.initial = initial
        self.buggy = buggy
        self.buggy_edges = frozenset(buggy_edges)
        self.name = name
        self._delta: dict[tuple[str, str], str] = {}
        for frm, tool, to in transitions:
            if frm not in self.states or to not in self.states:
                raise GraphError(f"edge ({frm}, {tool}, {to}) references unknown state")
            if tool not in self.states[frm].enabled:
                raise GraphError(f"tool {tool!r} not enabled in state {frm!r}")
            if (frm, tool) in self._delta:
                raise GraphError(f"duplicate edge for ({frm}, {tool})")
            self._delta[(frm, tool)] = to

    @property
    def transitions(self) -> frozenset[Edge]:
        return frozenset((f, t, to) for (f, t), to in self._delta.items())

    def step(self, state_label: str, tool: str) -> Optional[str]:
        """Next state label, or None when the tool is not enabled here."""
        if state_label not in self.states:
            raise UnknownState(state_label)
        return self._delta.get((state_label, tool))

    def tool_universe(self) -> frozenset[str]:
        out: set[str] = set()
        for state in self.states.values():
            out.update(state.enabled)
        return frozenset(out)

    @classmethod
    def from_transitions(cls, initial: str, transitions: Iterable[Edge],
                         extra_states: Iterable[str] = (), name: str = "observed") -> "EPAGraph":
        """Build a minimal graph whose enabled sets are the outgoing tools."""
        edges = list(transitions)
        labels = {initial, *extra_states}
        for frm, _tool, to in edges:
            labels.update((frm, to))
        enabled: dict[str, set[str]] = {label: set() for label in labels}
        for frm, tool, _to in edges:
            enabled[frm].add(tool)
        states = [AbstractState(label, frozenset(tools)) for label, tools in enabled.items()]
        return cls(states, initial, edges, name=name)


@dataclass(frozen=True)
class EdgeDiff:
    extra: frozenset[Edge]  # observed but not theoretical
    missing: frozenset[Edge]  # theoretical but not observed


def compare(observed: EPAGraph, theoretical: EPAGraph) -> tuple[float, EdgeDiff]:
    """Edge-set correspondence (Jaccard) plus the exact differences."""
    obs, theo = observed.transitions, theoretical.transitions
    union = obs | theo
    score = 1.0 if not union else len(obs & theo) / len(union)
    return score, EdgeDiff(extra=frozenset(obs - theo), missing=frozenset(theo - obs))


def export_dot(graph: EPAGraph) -> str:
    """Render as a DOT digraph; known-vulnerable edges are highlighted."""

    def q(s: str) -> str:
        return '"' + s.replace('"', '\\"') + '"'

    lines = [f"digraph {q(graph.name)} {{", "  rankdir=LR;"]
    for label in sorted(graph.states):
        shape = "doublecircle" if label == graph.initial else "circle"
        lines.append(f"  {q(label)} [shape={shape}];")
    for frm, tool, to in sorted(graph.transitions):
        attrs = [f"label={q(tool)}"]
        if (frm, tool, to) in graph.buggy_edges:
            attrs.append('color="gold"')
            attrs.append("penwidth=2.0")
        lines.append(f"  {q(frm)} -> {q(to)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Fixture loading
# ---------------------------------------------------------------------------


def graph_from_obj(obj: dict, include_buggy: bool = False) -> EPAGraph:
    transitions = [tuple(edge) for edge in obj["transitions"]]
    enabled = {s["label"]: set(s["enabled"]) for s in obj["states"]}
    buggy_edges: list[Edge] = []
    raw_buggy = obj.get("buggy_transition")
    if include_buggy and raw_buggy:
        frm, tool, to = raw_buggy
        transitions.append((frm, tool, to))
        buggy_edges.append((frm, tool, to))
        enabled[frm].add(tool)  # the vulnerable edge makes the tool enabled there
    states = [AbstractState(label, frozenset(tools)) for label, tools in enabled.items()]
    return EPAGraph(
        states,
        obj["initial"],
        transitions,
        buggy=bool(include_buggy and raw_buggy),
        buggy_edges=buggy_edges,
        name=obj.get("name", "epa"),
    )


def load_graph_file(path, include_buggy: bool = False) -> EPAGraph:
    return graph_from_obj(json.loads(Path(path).read_text("utf-8")), include_buggy)


def graph_to_obj(graph: EPAGraph) -> dict:
    """JSON shape served over the graph endpoint."""
    return {
        "name": graph.name,
        "initial": graph.initial,
        "buggy": graph.buggy,
        "states": [
            {"label": label, "enabled": sorted(graph.states[label].enabled)}
            for label in sorted(graph.states)
        ],
        "transitions": [list(edge) for edge in sorted(graph.transitions)],
        "buggy_edges": [list(edge) for edge in sorted(graph.buggy_edges)],
    }


def build_document_sharing_epa(buggy: bool = False) -> EPAGraph:
    """The document-sharing workflow graph; ``buggy=True`` adds the known
    unauthorized accept self-loop."""
    data = resources.files("intentgate.fixtures").joinpath("epa_document_sharing.json")
    return graph_from_obj(json.loads(data.read_text("utf-8")), include_buggy=buggy)
