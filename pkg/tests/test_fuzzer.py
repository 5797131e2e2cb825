import pytest
from hypothesis import given, settings, strategies as st

from intentgate.epa import (
    NO_SHARING_OVERWRITE,
    AbstractState,
    EPAGraph,
    GraphError,
    Invariant,
    ForbiddenTransition,
    build_document_sharing_epa,
)
from intentgate.fuzzer import (
    FuzzConfig,
    breach_probability,
    prune_unreachable,
    reduce_equal,
    reduce_true,
    render_report,
    report_to_obj,
    run_campaign,
)

LISTING_SEQUENCE = [
    "create_document",
    "initiate_share",
    "accept_sharing_request",
    "accept_sharing_request",
]


class TestRunCampaign:
    def test_buggy_fixture_violation_and_sequence(self, registry):
        report = run_campaign(
            build_document_sharing_epa(buggy=True),
            [NO_SHARING_OVERWRITE],
            FuzzConfig(seed=42, max_iterations=500),
            tool_universe=registry.names(),
        )
        assert report.found_violation()
        violation = report.violations[0]
        assert violation.invariant == "NoSharingOverwrite"
        assert violation.sequence.tools() == LISTING_SEQUENCE
        assert violation.iteration <= 500
        assert report.iterations_run == violation.iteration  # halt on first violation

    def test_fixed_fixture_clean_with_five_transitions(self, registry):
        report = run_campaign(
            build_document_sharing_epa(buggy=False),
            [NO_SHARING_OVERWRITE],
            FuzzConfig(seed=42, max_iterations=500),
            tool_universe=registry.names(),
        )
        assert not report.found_violation()
        assert report.iterations_run == 500
        assert len(report.discovered_transitions) == 5

    def test_zero_iterations_empty_report(self):
        report = run_campaign(
            build_document_sharing_epa(buggy=True),
            [NO_SHARING_OVERWRITE],
            FuzzConfig(seed=1, max_iterations=0),
        )
        assert report.iterations_run == 0
        assert not report.violations
        assert not report.discovered_transitions

    def test_seed_determinism(self, registry):
        reports = [
            report_to_obj(
                run_campaign(
                    build_document_sharing_epa(buggy=True),
                    [NO_SHARING_OVERWRITE],
                    FuzzConfig(seed=1234, max_iterations=500),
                    tool_universe=registry.names(),
                )
            )
            for _ in range(2)
        ]
        for r in reports:
            r.pop("elapsed_seconds")
        assert reports[0] == reports[1]

    def test_violation_sequence_replays_through_step(self, registry):
        graph = build_document_sharing_epa(buggy=True)
        report = run_campaign(
            graph,
            [NO_SHARING_OVERWRITE],
            FuzzConfig(seed=7, max_iterations=500),
            tool_universe=registry.names(),
        )
        steps = report.violations[0].sequence.steps
        state = graph.initial
        for step in steps:
            assert step.from_label == state
            nxt = graph.step(state, step.tool)
            assert nxt == step.to_label
            state = nxt
        assert NO_SHARING_OVERWRITE.violated_by(
            (steps[-1].from_label, steps[-1].tool, steps[-1].to_label)
        )

    def test_keep_going_collects_multiple_violations(self):
        report = run_campaign(
            build_document_sharing_epa(buggy=True),
            [NO_SHARING_OVERWRITE],
            FuzzConfig(seed=5, max_iterations=50, keep_going=True),
        )
        assert len(report.violations) > 1
        assert report.iterations_run == 50

    def test_render_report_shapes(self):
        buggy = run_campaign(
            build_document_sharing_epa(buggy=True),
            [NO_SHARING_OVERWRITE],
            FuzzConfig(seed=42, max_iterations=500),
        )
        text = render_report(buggy)
        assert "INVARIANT VIOLATION: 'NoSharingOverwrite'" in text
        assert "-> !! VIOLATION !!" in text
        assert "Iterations to discovery:" in text
        clean = run_campaign(
            build_document_sharing_epa(buggy=False),
            [NO_SHARING_OVERWRITE],
            FuzzConfig(seed=42, max_iterations=500),
        )
        text = render_report(clean)
        assert "No invariant violations found after 500 iterations" in text
        assert "Discovered transitions: 5" in text


def _graph_with_reads(registry):
    """Workflow graph plus universally enabled read tools (as self-loops)."""
    read_tools = {s.name for s in registry if s.tier.value == "READ"}
    base = build_document_sharing_epa(buggy=False)
    states = [
        AbstractState(s.label, s.enabled | read_tools) for s in base.states.values()
    ]
    edges = list(base.transitions) + [
        (label, tool, label) for label in base.states for tool in sorted(read_tools)
    ]
    return EPAGraph(states, base.initial, edges, name="with-reads")


class TestReduceTrue:
    def test_all_read_tools_removed(self, registry):
        graph = _graph_with_reads(registry)
        reduced, removed = reduce_true(graph, registry)
        read_tier = {s.name for s in registry if s.tier.value == "READ"}
        assert len(read_tier) == 6
        assert removed == read_tier
        assert reduced.tool_universe() & read_tier == frozenset()
        assert reduced.transitions == build_document_sharing_epa(False).transitions

    def test_pure_write_graph_unchanged(self, registry):
        graph = build_document_sharing_epa(buggy=False)
        reduced, removed = reduce_true(graph, registry)
        assert removed == frozenset()
        assert reduced.transitions == graph.transitions

    def test_read_edge_changing_state_rejected(self, registry):
        states = [
            AbstractState("A", frozenset({"read_document"})),
            AbstractState("B", frozenset()),
        ]
        graph = EPAGraph(states, "A", [("A", "read_document", "B")])
        with pytest.raises(GraphError):
            reduce_true(graph, registry)

    def test_enabledness_labeling_space_halves_per_tool(self, registry):
        # removing k universally enabled read tools shrinks the space of
        # possible enabled-set labels by a factor of 2^k
        graph = _graph_with_reads(registry)
        reduced, removed = reduce_true(graph, registry)
        k = len(removed)
        full_universe = len(graph.tool_universe())
        reduced_universe = len(reduced.tool_universe())
        assert 2**full_universe == 2**reduced_universe * 2**k

    def test_reduction_preserves_violation_findability(self, registry):
        config = FuzzConfig(seed=9, max_iterations=500)
        for buggy in (False, True):
            base = build_document_sharing_epa(buggy=buggy)
            graph = _graph_with_reads(registry) if not buggy else base
            reduced, _ = reduce_true(graph, registry)
            original = run_campaign(graph, [NO_SHARING_OVERWRITE], config)
            after = run_campaign(reduced, [NO_SHARING_OVERWRITE], config)
            assert original.found_violation() == after.found_violation() == buggy


class TestReduceEqual:
    def test_identical_read_preconditions_fuse(self, rules):
        graph = build_document_sharing_epa()
        classes = reduce_equal(rules, graph)
        by_tool = {tool: tuple(cls) for cls in classes for tool in cls}
        assert by_tool["read_document"] == by_tool["list_documents"]

    def test_revoke_and_create_differ(self, rules):
        graph = build_document_sharing_epa()
        classes = reduce_equal(rules, graph)
        by_tool = {tool: tuple(cls) for cls in classes for tool in cls}
        assert by_tool["revoke_document_access"] != by_tool["create_document"]

    def test_distinct_predicates_give_singletons(self):
        from intentgate.policy import load_policies

        rules = load_policies(
            "roles:\n  A: []\n  B: []\n"
            "allow:\n"
            "  - {id: r1, tools: [t1], required_role: A}\n"
            "  - {id: r2, tools: [t2], required_role: B}\n"
        )
        graph = EPAGraph.from_transitions("S", [("S", "t1", "S"), ("S", "t2", "S")])
        classes = reduce_equal(rules, graph)
        assert [len(c) for c in classes] == [1, 1]

    def test_partition_covers_universe(self, rules):
        graph = build_document_sharing_epa()
        classes = reduce_equal(rules, graph)
        flattened = sorted(t for cls in classes for t in cls)
        assert len(flattened) == len(set(flattened))
        assert set(flattened) >= set(graph.tool_universe())


class TestPruneUnreachable:
    def _with_orphan(self):
        base = build_document_sharing_epa(buggy=False)
        states = list(base.states.values()) + [
            AbstractState("ORPHAN", frozenset({"create_document"})),
            AbstractState("ORPHAN2", frozenset()),
        ]
        edges = list(base.transitions) + [("ORPHAN", "create_document", "ORPHAN2")]
        return EPAGraph(states, base.initial, edges)

    def test_orphan_pruned(self):
        pruned = prune_unreachable(self._with_orphan(), depth=8)
        assert "ORPHAN" not in pruned.states
        assert pruned.transitions == build_document_sharing_epa(False).transitions

    def test_depth_at_least_diameter_keeps_reachable_graph(self):
        graph = build_document_sharing_epa(buggy=False)
        pruned = prune_unreachable(graph, depth=4)
        assert pruned.transitions == graph.transitions
        assert set(pruned.states) == set(graph.states)

    def test_depth_one_keeps_initial_successors_only(self):
        pruned = prune_unreachable(build_document_sharing_epa(False), depth=1)
        assert set(pruned.states) == {"INITIAL", "DOC_CREATED"}
        assert pruned.transitions == {("INITIAL", "create_document", "DOC_CREATED")}

    def test_never_removes_states_within_depth(self):
        graph = build_document_sharing_epa(buggy=False)
        for depth in range(1, 6):
            pruned = prune_unreachable(graph, depth)
            reachable = {"INITIAL"}
            frontier = {"INITIAL"}
            for _ in range(depth):
                frontier = {
                    to for frm, _t, to in graph.transitions if frm in frontier
                }
                reachable |= frontier
            assert reachable <= set(pruned.states)


class TestBreachProbability:
    def test_zero_layer_zeroes_product(self):
        assert breach_probability([0.006, 0.0, 0.9]) == 0.0

    def test_all_ones(self):
        assert breach_probability([1.0, 1.0, 1.0]) == 1.0

    def test_halves(self):
        assert breach_probability([0.5, 0.5, 0.5]) == pytest.approx(0.125)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            breach_probability([0.5, 1.5, 0.5])

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=5))
    def test_product_bounds(self, rates):
        p = breach_probability(rates)
        assert 0.0 <= p <= 1.0
        assert p <= min(rates)
