"""
Admissibility of a completed causality graph.

1. No cycle through call, get, sequencing or indirect edges. Loop edges
   only lead into the next iteration of a repetition and are left out.
2. For every object, each Receive reaches every later Receive of the same
   object over solid edges only. Receives in different branches of one
   choice are not compared.
"""

import itertools
from typing import List, Optional

import networkx as nx

from causality.graph import LOOP, CausalityGraph, NodeId
from utils.reporting import Report

STAGE = "Causality"
RULE_CYCLE = "admissibility: cycle-freedom"
RULE_ORDER = "admissibility: method order"


def _name(graph: CausalityGraph, node: NodeId) -> str:
    return f"{node[0]}:{graph.graph.nodes[node]['label']}"


def find_cycle(graph: CausalityGraph) -> Optional[List[NodeId]]:
    """Nodes of one cycle in order, or None. Loop edges are not followed."""
    forward = nx.subgraph_view(graph.graph, filter_edge=lambda u, v: graph.graph.edges[u, v]["kind"] != LOOP)
    try:
        edges = nx.find_cycle(forward, orientation="original")
    except nx.NetworkXNoCycle:
        return None
    return [u for u, _, _ in edges]


def unordered_receives(graph: CausalityGraph):
    """Pairs (a, b) of Receives of one object, a before b, with no solid path from a to b."""
    solid = graph.solid()
    objects = sorted({node[0] for node in graph.graph.nodes})
    for obj in objects:
        receives = [n for n in graph.nodes_of(obj) if graph.kind(n) == "Receive"]
        for a, b in itertools.combinations(receives, 2):
            if graph.exclusive(a, b):
                continue
            if not nx.has_path(solid, a, b):
                yield a, b


def admissible(graph: CausalityGraph) -> Report:
    report = Report()
    cycle = find_cycle(graph)
    if cycle is not None:
        path = " -> ".join(_name(graph, n) for n in cycle + cycle[:1])
        report.fail(STAGE, RULE_CYCLE, f"the causality graph has a cycle: {path}", location=cycle[0][0])
    for a, b in unordered_receives(graph):
        report.fail(
            STAGE, RULE_ORDER,
            f"{_name(graph, b)} is not causally after {_name(graph, a)}",
            location=a[0],
        )
    return report
