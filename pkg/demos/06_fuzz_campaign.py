"""Walkthrough: fuzzing the enabled-tool graph for unauthorized transitions.

The vulnerable workflow variant contains one extra edge: accepting a
sharing request on a document that is already shared silently overwrites
the grant. The seeded fuzzer falsifies the NoSharingOverwrite invariant
and halts with the offending call sequence; on the fixed graph the same
budget finds nothing and the observed graph matches the design exactly.
"""

from intentgate.config import fixture_path
from intentgate.epa import (
    NO_SHARING_OVERWRITE,
    EPAGraph,
    build_document_sharing_epa,
    compare,
    export_dot,
)
from intentgate.fuzzer import FuzzConfig, render_report, run_campaign
from intentgate.registry import load_registry_file

universe = load_registry_file(fixture_path("tools.json")).names()
config = FuzzConfig(seed=42, max_iterations=500)

print("[1/2] fuzzing the vulnerable workflow graph...")
report = run_campaign(
    build_document_sharing_epa(buggy=True), [NO_SHARING_OVERWRITE], config, tool_universe=universe
)
print(render_report(report))

print("\n[2/2] fuzzing the fixed workflow graph...")
fixed = build_document_sharing_epa(buggy=False)
report = run_campaign(fixed, [NO_SHARING_OVERWRITE], config, tool_universe=universe)
print(render_report(report))

observed = EPAGraph.from_transitions(fixed.initial, report.discovered_transitions)
score, diff = compare(observed, fixed)
print(f"\nobserved vs designed correspondence: {score:.0%} "
      f"(extra: {len(diff.extra)}, missing: {len(diff.missing)})")

print("\nDOT export of the vulnerable graph (the gold edge is the bug):")
print(export_dot(build_document_sharing_epa(buggy=True)))
