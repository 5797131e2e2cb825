"""Seeded, invariant-falsifying fuzzer over enabled-tool graphs.

Each iteration walks one call sequence from the initial state. At every
step the walker picks a currently enabled tool with probability
``valid_ratio`` (default 0.8) and otherwise probes with an arbitrary tool
from the whole universe; rejected probes consume sequence length but
produce no transition. Every executed transition is checked against the
declared invariants and the campaign halts on the first violation.

Randomness comes from ``random.Random`` (Mersenne Twister) consuming only
``random()`` so identical seeds reproduce identical reports on any
platform, independent of hash seeds or library versions.
"""

from __future__ import annotations

import json
import random
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .epa import AbstractState, Edge, EPAGraph, GraphError, Invariant
from .policy import PolicyRuleSet
from .registry import Tier, ToolRegistry

DEFAULT_ACTORS = ("NHI_USER_A", "NHI_USER_B", "NHI_USER_C")


@dataclass(frozen=True)
class FuzzConfig:
    seed: int
    max_iterations: int = 500
    valid_ratio: float = 0.8
    max_sequence_length: int = 8
    prune_depth: int = 8
    keep_going: bool = False
    actors: tuple[str, ...] = DEFAULT_ACTORS

    def __post_init__(self):
        if not 0.0 <= self.valid_ratio <= 1.0:
            raise ValueError("valid_ratio must lie in [0, 1]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.max_sequence_length < 1 or self.prune_depth < 1:
            raise ValueError("sequence length and prune depth must be >= 1")


@dataclass(frozen=True)
class CallStep:
    actor: str
    tool: str
    from_label: str
    to_label: str
    violation: bool = False

    def render(self) -> str:
        target = "!! VIOLATION !!" if self.violation else self.to_label
        return f"{self.from_label}[{self.tool}] -> {target}"


@dataclass(frozen=True)
class CallSequence:
    steps: tuple[CallStep, ...]

    def __post_init__(self):
        for a, b in zip(self.steps, self.steps[1:]):
            assert a.to_label == b.from_label, "steps must chain"

    def tools(self) -> list[str]:
        return [s.tool for s in self.steps]


@dataclass(frozen=True)
class ViolationReport:
    invariant: str
    sequence: CallSequence
    iteration: int


@dataclass(frozen=True)
class FuzzReport:
    seed: int
    iterations_run: int
    violations: tuple[ViolationReport, ...]
    discovered_transitions: frozenset[Edge]
    elapsed_seconds: float

    def found_violation(self) -> bool:
        return bool(self.violations)


def _pick(rng: random.Random, options: Sequence[str]) -> str:
    # index derived from random() only, for cross-platform reproducibility
    return options[min(int(rng.random() * len(options)), len(options) - 1)]


def run_campaign(
    graph: EPAGraph,
    invariants: Iterable[Invariant],
    config: FuzzConfig,
    tool_universe: Optional[Iterable[str]] = None,
) -> FuzzReport:
    """Run one seeded campaign; halts on the first violation unless
    ``config.keep_going`` collects them all."""
    rng = random.Random(config.seed)
    invariants = list(invariants)
    universe = sorted(tool_universe) if tool_universe else sorted(graph.tool_universe())
    discovered: set[Edge] = set()
    violations: list[ViolationReport] = []
    started = time.perf_counter()

    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        state = graph.initial
        steps: list[CallStep] = []
        for _ in range(config.max_sequence_length):
            enabled = sorted(graph.states[state].enabled)
            if enabled and rng.random() < config.valid_ratio:
                tool = _pick(rng, enabled)
            elif universe:
                tool = _pick(rng, universe)  # adversarial probe
            else:
                break
            nxt = graph.step(state, tool)
            if nxt is None:
                continue  # rejected probe: consumes length, no transition
            edge: Edge = (state, tool, nxt)
            discovered.add(edge)
            hit = next((inv for inv in invariants if inv.violated_by(edge)), None)
            steps.append(CallStep(_pick(rng, config.actors), tool, state, nxt,
                                  violation=hit is not None))
            if hit is not None:
                violations.append(
                    ViolationReport(hit.name, CallSequence(tuple(steps)), iteration)
                )
                break
            state = nxt
        if violations and not config.keep_going:
            break

    halted_early = bool(violations) and not config.keep_going
    return FuzzReport(
        seed=config.seed,
        iterations_run=iteration if halted_early else config.max_iterations,
        violations=tuple(violations),
        discovered_transitions=frozenset(discovered),
        elapsed_seconds=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# State-space reduction heuristics
# ---------------------------------------------------------------------------


def reduce_true(graph: EPAGraph, registry: ToolRegistry) -> tuple[EPAGraph, frozenset[str]]:
    """Abstract read-only tools out of the graph.

    Read tools never change state, so they are dropped from every enabled
    set and their self-loop edges are removed. A read tool with a
    state-changing edge is a definition error.
    """
    read_tools = {s.name for s in registry if s.tier is Tier.READ}
    removed = graph.tool_universe() & read_tools
    edges = []
    for frm, tool, to in graph.transitions:
        if tool in read_tools:
            if frm != to:
                raise GraphError(f"read tool {tool!r} must not change state ({frm} -> {to})")
            continue
        edges.append((frm, tool, to))
    states = [
        AbstractState(s.label, s.enabled - read_tools) for s in graph.states.values()
    ]
    reduced = EPAGraph(
        states,
        graph.initial,
        edges,
        buggy=graph.buggy,
        buggy_edges=[e for e in graph.buggy_edges if e[1] not in read_tools],
        name=graph.name,
    )
    return reduced, frozenset(removed)


def reduce_equal(rules: PolicyRuleSet, graph: EPAGraph) -> list[list[str]]:
    """Partition tools into classes with identical authorization preconditions.

    Two tools land in the same class when the normalized predicates of
    their allow rules coincide; probing one representative per class per
    state then covers the whole class.
    """
    tools = set(graph.tool_universe())
    for rule in rules.allow:
        tools.update(rule.tools)
    signatures: dict[tuple, list[str]] = {}
    for tool in sorted(tools):
        sig = tuple(sorted(r.precondition_signature() for r in rules.allow_rules_for(tool)))
        signatures.setdefault(sig, []).append(tool)
    return sorted(signatures.values())


def prune_unreachable(graph: EPAGraph, depth: int) -> EPAGraph:
    """Keep only states reachable from the initial state within ``depth`` edges."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    dist = {graph.initial: 0}
    queue = deque([graph.initial])
    while queue:
        label = queue.popleft()
        if dist[label] >= depth:
            continue
        for frm, _tool, to in graph.transitions:
            if frm == label and to not in dist:
                dist[to] = dist[label] + 1
                queue.append(to)
    kept = set(dist)
    states = [s for s in graph.states.values() if s.label in kept]
    edges = [e for e in graph.transitions if e[0] in kept and e[2] in kept]
    return EPAGraph(
        states,
        graph.initial,
        edges,
        buggy=graph.buggy,
        buggy_edges=[e for e in graph.buggy_edges if e[0] in kept and e[2] in kept],
        name=graph.name,
    )


def breach_probability(layer_bypass_rates: Sequence[float]) -> float:
    """Compound breach probability of stacked screening layers (product of
    per-layer bypass rates)."""
    product = 1.0
    for rate in layer_bypass_rates:
        if not 0.0 <= rate <= 1.0:
            raise ValueError("bypass rates must lie in [0, 1]")
        product *= rate
    return product


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------


def render_report(report: FuzzReport) -> str:
    lines = []
    if report.violations:
        first = report.violations[0]
        lines.append(f"INVARIANT VIOLATION: '{first.invariant}'")
        lines.append("  Call sequence:")
        for step in first.sequence.steps:
            lines.append(f"    {step.render()}")
        lines.append(
            f"  Iterations to discovery: {first.iteration} ({report.elapsed_seconds:.2f}s)"
        )
    else:
        lines.append(
            f"  No invariant violations found after {report.iterations_run} iterations"
            f" ({report.elapsed_seconds:.2f}s)."
        )
        lines.append(f"  Discovered transitions: {len(report.discovered_transitions)}")
    return "\n".join(lines)


def report_to_obj(report: FuzzReport) -> dict:
    return {
        "seed": report.seed,
        "iterations_run": report.iterations_run,
        "violations": [
            {
                "invariant": v.invariant,
                "iteration": v.iteration,
                "sequence": [
                    {
                        "actor": s.actor,
                        "tool": s.tool,
                        "from": s.from_label,
                        "to": s.to_label,
                        "violation": s.violation,
                    }
                    for s in v.sequence.steps
                ],
            }
            for v in report.violations
        ],
        "discovered_transitions": [list(e) for e in sorted(report.discovered_transitions)],
        "elapsed_seconds": report.elapsed_seconds,
    }


def report_to_json(report: FuzzReport) -> str:
    return json.dumps(report_to_obj(report), indent=2)
