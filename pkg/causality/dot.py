"""Graphviz export of causality graphs, one cluster per object."""

from causality.graph import DOTTED, GET, CausalityGraph


def _id(node) -> str:
    return f'"{node[0]}:{node[1]}"'


def _quote(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(graph: CausalityGraph, name: str = "causality") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=box, fontsize=10];"]
    for obj in sorted({n[0] for n in graph.graph.nodes}):
        lines.append(f'  subgraph "cluster_{_quote(obj)}" {{')
        lines.append(f'    label="{_quote(obj)}";')
        for node in graph.nodes_of(obj):
            lines.append(f'    {_id(node)} [label="{_quote(graph.graph.nodes[node]["label"])}"];')
        lines.append("  }")
    for u, v in graph.edges():
        kind = graph.graph.edges[u, v]["kind"]
        if kind in DOTTED:
            style = " [style=dotted]"
        elif kind == GET:
            style = " [color=gray]"
        else:
            style = ""
        lines.append(f"  {_id(u)} -> {_id(v)}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
