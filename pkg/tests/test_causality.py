"""
Causality graphs: construction, get edges, admissibility and export.

Run with: pytest tests/test_causality.py -v
"""

import random

import pytest

from causality.admissibility import RULE_CYCLE, RULE_ORDER, admissible, find_cycle, unordered_receives
from causality.dot import export_dot
from causality.graph import CALL, GET, INDIRECT, LOOP, SEQ, CausalityGraph, add_get_edges, build_partial_graph
from syntax.parser import parse_global_type
from tests.conftest import load_pair, read
from typecheck.checker import ProgramChecker
from utils.errors import ResolutionError
from utils.reporting import Report


def protocol(name):
    return parse_global_type(read(name))


def gui_graph():
    program, g = load_pair("gui")
    checker = ProgramChecker(program, g)
    checker.run()
    return checker.graph


def of_kind(graph, obj, kind):
    return [n for n in graph.nodes_of(obj) if graph.kind(n) == kind]


def rules(report):
    return {d.rule for d in report.diagnostics}


class TestPartialGraph:
    """Nodes and protocol-derived edges, before any get edge"""

    def test_01_gui_nodes(self):
        graph = build_partial_graph(protocol("gui.proto"))
        assert [graph.kind(n) for n in graph.nodes_of("U")] == ["Receive", "Send", "Put", "Receive", "Read", "Put"]
        assert [graph.kind(n) for n in graph.nodes_of("S")] == ["Receive", "Put"]

    def test_02_no_get_edges(self):
        graph = build_partial_graph(protocol("gui.proto"))
        assert graph.edges(GET) == []
        assert graph.edges(SEQ)

    def test_03_indirect_edge_between_processes(self):
        graph = build_partial_graph(protocol("gui.proto"))
        (src, dst), = graph.edges(INDIRECT)
        assert src[0] == dst[0] == "U"
        assert graph.kind(src) == "Put" and graph.kind(dst) == "Receive"

    def test_04_call_edges_follow_sends(self):
        graph = build_partial_graph(protocol("gui.proto"))
        calls = graph.edges(CALL)
        assert len(calls) == 3
        for src, dst in calls:
            assert graph.kind(src) == "Send"
            assert graph.kind(dst) == "Receive"
        assert {dst[0] for _, dst in calls} == {"I", "S", "U"}

    def test_05_terms_per_method(self):
        graph = build_partial_graph(protocol("gui.proto"))
        assert graph.terms[("S", "cmp")] == set(of_kind(graph, "S", "Put"))
        assert len(graph.terms[("U", "start")]) == 1

    def test_06_repetition_loops_back(self):
        graph = build_partial_graph(protocol("repeat.proto"))
        loops = graph.edges(LOOP)
        assert loops
        solid = graph.solid()
        assert not any(solid.has_edge(u, v) for u, v in loops)

    def test_07_branches_are_exclusive(self):
        graph = build_partial_graph(protocol("branch.proto"))
        first, second = of_kind(graph, "X2", "Put")
        assert graph.exclusive(first, second)
        receive = of_kind(graph, "X2", "Receive")[0]
        assert not graph.exclusive(receive, first)

    def test_08_to_dict(self):
        graph = build_partial_graph(protocol("gui.proto"))
        data = graph.to_dict()
        assert set(data) == {"nodes", "edges"}
        assert set(data["nodes"][0]) == {"id", "object", "kind", "label"}
        assert {e["kind"] for e in data["edges"]} == {SEQ, INDIRECT, CALL}


class TestGetEdges:
    """Resolution of reads against method terminations"""

    def test_01_gui_has_one_get_edge(self):
        graph = gui_graph()
        (src, dst), = graph.edges(GET)
        assert src[0] == "S" and graph.kind(src) == "Put"
        assert dst[0] == "U" and graph.kind(dst) == "Read"

    def test_02_partial_graph_left_unchanged(self):
        graph = build_partial_graph(protocol("gui.proto"))
        read_node = of_kind(graph, "U", "Read")[0]
        done = add_get_edges(graph, {read_node: {("S", "cmp")}})
        assert graph.edges(GET) == []
        assert len(done.edges(GET)) == 1

    def test_03_unresolvable_read_warns(self):
        graph = build_partial_graph(protocol("gui.proto"))
        read_node = of_kind(graph, "U", "Read")[0]
        report = Report()
        add_get_edges(graph, {read_node: set()}, report)
        assert report.ok
        assert report.warnings and "never be resolved" in report.warnings[0]

    def test_04_unknown_read_node(self):
        graph = build_partial_graph(protocol("gui.proto"))
        with pytest.raises(ResolutionError, match="no Read node"):
            add_get_edges(graph, {("U", 99): {("S", "cmp")}})


class TestAdmissibility:
    """Cycle freedom and the order of Receives"""

    def test_01_gui_admissible(self):
        assert admissible(gui_graph()).ok

    def test_02_mutual_get_cycle(self):
        graph = build_partial_graph(protocol("mutual_get.proto"))
        b_read = of_kind(graph, "B", "Read")[0]
        c_read = of_kind(graph, "C", "Read")[0]
        done = add_get_edges(graph, {b_read: {("C", "n")}, c_read: {("B", "m")}})
        cycle = find_cycle(done)
        assert cycle is not None
        assert len(cycle) == 4
        assert {n[0] for n in cycle} == {"B", "C"}
        report = admissible(done)
        assert RULE_CYCLE in rules(report)

    def test_03_without_gets_mutual_get_is_acyclic(self):
        graph = build_partial_graph(protocol("mutual_get.proto"))
        assert find_cycle(graph) is None
        assert admissible(graph).ok

    def test_04_lost_call_breaks_receive_order(self):
        graph = gui_graph().copy()
        first, later = of_kind(graph, "U", "Receive")
        caller = next(src for src, dst in graph.edges(CALL) if dst == later)
        graph.graph.remove_edge(caller, later)
        assert list(unordered_receives(graph)) == [(first, later)]
        report = admissible(graph)
        assert rules(report) == {RULE_ORDER}
        assert report.diagnostics[0].location == "U"

    def test_05_repetition_is_admissible(self):
        program, g = load_pair("repeat")
        checker = ProgramChecker(program, g)
        checker.run()
        assert checker.graph.edges(LOOP)
        assert find_cycle(checker.graph) is None
        assert admissible(checker.graph).ok

    def test_06_one_item_body_loops_onto_itself(self):
        g = parse_global_type(
            "main -> U.run\n"
            "U -> S.comp\n"
            "repeat {\n"
            "  S -> U.up\n"
            "} invariant top\n"
            "end\n"
        )
        graph = build_partial_graph(g)
        assert any(u == v for u, v in graph.edges(LOOP))
        assert find_cycle(graph) is None
        assert admissible(graph).ok


class TestExport:
    """Graphviz output"""

    def test_01_digraph_with_clusters(self):
        text = export_dot(gui_graph())
        assert text.startswith("digraph causality {")
        for obj in ("U", "I", "S"):
            assert f'"cluster_{obj}"' in text
        assert text.rstrip().endswith("}")

    def test_02_edge_styles(self):
        text = export_dot(gui_graph())
        assert "[style=dotted]" in text
        assert "[color=gray]" in text

    def test_03_graph_name(self):
        text = export_dot(build_partial_graph(protocol("gui.proto")), name="gui")
        assert text.startswith("digraph gui {")
        assert "->" in text


def random_graph(rng, size):
    graph = CausalityGraph()
    nodes = [(rng.choice("AB"), k) for k in range(size)]
    for node in nodes:
        graph.graph.add_node(node, obj=node[0], kind="Put", label=str(node[1]), item=None, branches=())
    for u in nodes:
        for v in nodes:
            if u != v and rng.random() < 0.12:
                graph.add_edge(u, v, rng.choice((SEQ, CALL, GET, INDIRECT, LOOP)))
    return graph, nodes


def cyclic_by_paths(graph):
    """Walk every simple path over non-loop edges; True if one can close."""
    succ = {n: [v for v in graph.graph.successors(n) if graph.graph.edges[n, v]["kind"] != LOOP]
            for n in graph.graph.nodes}

    def closes(start, node, seen):
        for nxt in succ[node]:
            if nxt == start:
                return True
            if nxt not in seen and closes(start, nxt, seen | {nxt}):
                return True
        return False

    return any(closes(n, n, frozenset({n})) for n in graph.graph.nodes)


class TestCycleOracle:
    """Cycle detection against path enumeration on random graphs"""

    def test_01_agrees_with_path_enumeration(self):
        rng = random.Random(31)
        seen = set()
        for _ in range(200):
            graph, _ = random_graph(rng, rng.randint(1, 12))
            cycle = find_cycle(graph)
            assert (cycle is not None) == cyclic_by_paths(graph)
            seen.add(cycle is not None)
        assert seen == {True, False}

    def test_02_reported_cycle_is_a_cycle(self):
        rng = random.Random(37)
        for _ in range(100):
            graph, _ = random_graph(rng, rng.randint(2, 12))
            cycle = find_cycle(graph)
            if cycle is None:
                continue
            for u, v in zip(cycle, cycle[1:] + cycle[:1]):
                assert graph.graph.has_edge(u, v)
                assert graph.graph.edges[u, v]["kind"] != LOOP

    def test_03_adding_edges_keeps_a_cycle(self):
        rng = random.Random(41)
        for _ in range(100):
            graph, nodes = random_graph(rng, rng.randint(2, 12))
            if find_cycle(graph) is None:
                continue
            for _ in range(5):
                u, v = rng.sample(nodes, 2)
                graph.add_edge(u, v, rng.choice((SEQ, CALL, GET, INDIRECT)))
                assert find_cycle(graph) is not None
                assert RULE_CYCLE in rules(admissible(graph))
