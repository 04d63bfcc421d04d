"""
The causality graph of a protocol.

Every item of every propagated object type becomes a node, keyed by the
item's origin (object, ordinal). Edges:

- seq: consecutive items of one object
- indirect: a Put followed by the Receive of the next process (dotted)
- call: a Send to the Receive it starts (same call id)
- loop: from the end of a repetition body back to its start (dotted)
- get: from each Put that may resolve a future to the Read of that future

Branch bodies become parallel chains that leave the choice node and join
at the next item.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx

from projection.methods import segments_in_order
from projection.wellformed import Projection, project_all
from syntax import session_types as S
from syntax.pretty import pretty, pretty_formula
from utils.errors import ResolutionError
from utils.reporting import Report

NodeId = Tuple[str, int]
Resolver = Tuple[str, str]

SEQ = "seq"
INDIRECT = "indirect"
CALL = "call"
LOOP = "loop"
GET = "get"

DOTTED = frozenset({INDIRECT, LOOP})

_KINDS = {
    S.Receive: "Receive",
    S.Send: "Send",
    S.Put: "Put",
    S.LRead: "Read",
    S.LRepeat: "Repeat",
    S.Select: "Select",
    S.Offer: "Offer",
}


def _label(item) -> str:
    if isinstance(item, S.LRepeat):
        return f"Repeat<{pretty_formula(item.invariant)}>"
    if isinstance(item, S.Select):
        return "Select"
    if isinstance(item, S.Offer):
        return f"Offer {item.source[0]}.{item.source[1]}"
    return pretty(item)


@dataclass
class CausalityGraph:
    graph: nx.DiGraph = field(default_factory=nx.DiGraph)
    # (object, method) -> Put nodes that terminate a process of that method
    terms: Dict[Resolver, Set[NodeId]] = field(default_factory=dict)

    def add_item(self, item, branches: Tuple[Tuple[NodeId, int], ...]) -> NodeId:
        node = item.origin
        self.graph.add_node(
            node, obj=node[0], kind=_KINDS[type(item)], label=_label(item),
            item=item, branches=branches,
        )
        return node

    def add_edge(self, src: NodeId, dst: NodeId, kind: str) -> None:
        if not self.graph.has_edge(src, dst):
            self.graph.add_edge(src, dst, kind=kind)

    def nodes_of(self, obj: str) -> List[NodeId]:
        return sorted(n for n, data in self.graph.nodes(data=True) if data["obj"] == obj)

    def kind(self, node: NodeId) -> str:
        return self.graph.nodes[node]["kind"]

    def edges(self, kind: Optional[str] = None) -> List[Tuple[NodeId, NodeId]]:
        return sorted(
            (u, v) for u, v, data in self.graph.edges(data=True) if kind is None or data["kind"] == kind
        )

    def solid(self) -> nx.DiGraph:
        """The graph without dotted edges."""
        return nx.subgraph_view(
            self.graph, filter_edge=lambda u, v: self.graph.edges[u, v]["kind"] not in DOTTED
        )

    def exclusive(self, a: NodeId, b: NodeId) -> bool:
        """True if a and b lie in different branches of one choice."""
        taken = dict(self.graph.nodes[a]["branches"])
        return any(
            choice in taken and taken[choice] != index for choice, index in self.graph.nodes[b]["branches"]
        )

    def copy(self) -> "CausalityGraph":
        return CausalityGraph(self.graph.copy(), {k: set(v) for k, v in self.terms.items()})

    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"id": f"{o}:{k}", "object": o, "kind": self.kind((o, k)), "label": self.graph.nodes[(o, k)]["label"]}
                for o, k in sorted(self.graph.nodes)
            ],
            "edges": [
                {"from": f"{u[0]}:{u[1]}", "to": f"{v[0]}:{v[1]}", "kind": self.graph.edges[u, v]["kind"]}
                for u, v in self.edges()
            ],
        }


class GraphBuilder:
    def __init__(self, projection: Projection):
        self.projection = projection
        self.out = CausalityGraph()

    def build(self) -> CausalityGraph:
        for obj, local in sorted(self.projection.propagated.items()):
            self._chain(local.items, [], ())
            for method, segment in segments_in_order(local):
                puts = {i.origin for i in S.local_items(segment.items) if isinstance(i, S.Put)}
                self.out.terms.setdefault((obj, method), set()).update(puts)
        self._calls()
        return self.out

    def _link(self, exits: List[NodeId], node: NodeId) -> None:
        for prev in exits:
            dotted = self.out.kind(prev) == "Put" and self.out.kind(node) == "Receive"
            self.out.add_edge(prev, node, INDIRECT if dotted else SEQ)

    def _chain(self, items, exits: List[NodeId], branches) -> List[NodeId]:
        for item in items:
            if isinstance(item, (S.LSkip, S.LEnd)):
                continue
            node = self.out.add_item(item, branches)
            self._link(exits, node)
            exits = [node]
            if isinstance(item, S.LRepeat):
                exits = self._repeat(item, node, branches)
            elif isinstance(item, S.Select):
                exits = self._branches(node, item.branches, branches)
            elif isinstance(item, S.Offer):
                exits = self._branches(node, [b.body for b in item.branches], branches)
        return exits

    def _repeat(self, item: S.LRepeat, node: NodeId, branches) -> List[NodeId]:
        exits = self._chain(item.body, [node], branches)
        first = [n for n in self.out.graph.successors(node)]
        for last in exits:
            for head in first:
                if last != node:
                    self.out.add_edge(last, head, LOOP)
        return exits

    def _branches(self, node: NodeId, bodies, branches) -> List[NodeId]:
        exits: List[NodeId] = []
        for index, body in enumerate(bodies):
            exits.extend(self._chain(body, [node], branches + ((node, index),)))
        return exits

    def _calls(self) -> None:
        receives: Dict[int, List[NodeId]] = {}
        sends: List[Tuple[NodeId, S.Send]] = []
        for node, data in self.out.graph.nodes(data=True):
            item = data["item"]
            if isinstance(item, S.Receive):
                for cid in item.calls:
                    receives.setdefault(cid, []).append(node)
            elif isinstance(item, S.Send):
                sends.append((node, item))
        for node, send in sends:
            for cid in send.calls:
                for target in receives.get(cid, ()):
                    if target[0] == send.callee:
                        self.out.add_edge(node, target, CALL)


def build_partial_graph(g: S.GlobalType, projection: Optional[Projection] = None) -> CausalityGraph:
    """
    Nodes, sequencing, call and indirect edges of the protocol; no get edges.

    Raises:
        ProjectionUndefined: if g is not projectable
    """
    return GraphBuilder(projection or project_all(g)).build()


def add_get_edges(
    graph: CausalityGraph,
    reads: Mapping[NodeId, Iterable[Resolver]],
    report: Optional[Report] = None,
) -> CausalityGraph:
    """
    Edges from every Put of every possible resolver to each Read node.

    Args:
        graph: partial graph, left unchanged
        reads: Read node -> methods that may resolve the future it reads
        report: receives a warning for reads nothing can resolve

    Raises:
        ResolutionError: if a read is not a node of the graph
    """
    out = graph.copy()
    for read, resolvers in sorted(reads.items()):
        if read not in out.graph:
            raise ResolutionError(f"get site {read[0]}:{read[1]} has no Read node")
        resolvers = sorted(resolvers)
        if not resolvers and report is not None:
            report.warn(f"read {out.graph.nodes[read]['label']} of {read[0]} can never be resolved")
        for resolver in resolvers:
            for put in sorted(out.terms.get(resolver, ())):
                out.add_edge(put, read, GET)
    return out
