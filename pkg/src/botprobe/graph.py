"""Conversation graph: dialogs as vertices, transitions as edges.

Path enumeration is restricted to simple paths (no repeated dialog) with
depth and count caps, because realistic bot designs contain loops and the
number of paths grows exponentially with branching.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .botdef import BotDefinition
from .errors import UnknownNodeError


@dataclass(frozen=True)
class Edge:
    source: str
    label: str
    target: str


@dataclass(frozen=True)
class Path:
    """A simple path through the conversation graph."""

    nodes: tuple[str, ...]
    edge_labels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"path repeats a node: {self.nodes}")
        if len(self.edge_labels) != max(len(self.nodes) - 1, 0):
            raise ValueError("edge_labels must have one entry per hop")

    @property
    def length(self) -> int:
        """Number of edges traversed."""
        return len(self.edge_labels)

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "edge_labels": list(self.edge_labels), "length": self.length}


@dataclass
class PathSearchResult:
    paths: list[Path]
    truncated: bool = False


@dataclass
class ConversationGraph:
    """Immutable after build; enumeration functions are pure."""

    nodes: set[str] = field(default_factory=set)
    adjacency: dict[str, list[Edge]] = field(default_factory=dict)

    @property
    def terminals(self) -> set[str]:
        return {n for n in self.nodes if not self.adjacency.get(n)}

    def edges(self) -> list[Edge]:
        return [e for node in self.adjacency for e in self.adjacency[node]]

    def out_edges(self, node: str) -> list[Edge]:
        return list(self.adjacency.get(node, []))

    def to_dict(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [{"source": e.source, "label": e.label, "target": e.target} for e in self.edges()],
            "terminals": sorted(self.terminals),
        }


def build_graph(definition: BotDefinition) -> ConversationGraph:
    """One node per dialog, one edge per transition; terminals fall out of out-degree."""
    graph = ConversationGraph()
    for dialog in definition.dialogs:
        graph.nodes.add(dialog.name)
        graph.adjacency.setdefault(dialog.name, [])
    for dialog in definition.dialogs:
        for tr in dialog.transitions:
            graph.adjacency[dialog.name].append(Edge(dialog.name, tr.label, tr.target))
    return graph


def enumerate_simple_paths(
    graph: ConversationGraph,
    src: str,
    dst: str,
    max_depth: int = 20,
    max_paths: int = 500,
) -> PathSearchResult:
    """All simple paths src -> dst, in lexicographic order of node sequences.

    ``max_depth`` bounds the number of edges per path; enumeration stops with
    ``truncated=True`` once ``max_paths`` paths have been collected.
    src == dst yields the single zero-length path [src].
    """
    for name in (src, dst):
        if name not in graph.nodes:
            raise UnknownNodeError(f"unknown dialog '{name}'")
    if max_depth < 1 or max_paths < 1:
        raise ValueError("max_depth and max_paths must be >= 1")

    paths: list[Path] = []
    truncated = False
    node_stack = [src]
    label_stack: list[str] = []
    on_path = {src}

    def visit(node: str) -> bool:
        nonlocal truncated
        if node == dst:
            if len(paths) >= max_paths:
                truncated = True
                return False
            paths.append(Path(tuple(node_stack), tuple(label_stack)))
            return True
        if len(label_stack) >= max_depth:
            return True
        for edge in sorted(graph.out_edges(node), key=lambda e: (e.target, e.label)):
            if edge.target in on_path:
                continue
            node_stack.append(edge.target)
            label_stack.append(edge.label)
            on_path.add(edge.target)
            keep_going = visit(edge.target)
            on_path.discard(edge.target)
            label_stack.pop()
            node_stack.pop()
            if not keep_going:
                return False
        return True

    visit(src)
    return PathSearchResult(paths, truncated)


def nodes_on_terminal_paths(graph: ConversationGraph, src: str) -> set[str]:
    """Every dialog lying on some simple path from ``src`` to a terminal.

    ``src`` itself is always included.  Reachability alone is not enough in
    cyclic graphs (a reachable node may only sit on looping routes), so this
    walks actual simple paths and marks the stack whenever a terminal is hit.
    """
    if src not in graph.nodes:
        raise UnknownNodeError(f"unknown dialog '{src}'")
    terminals = graph.terminals
    marked: set[str] = {src}
    stack = [src]
    on_path = {src}

    def visit(node: str) -> None:
        if node in terminals:
            marked.update(stack)
            return
        for edge in sorted(graph.out_edges(node), key=lambda e: (e.target, e.label)):
            if edge.target in on_path:
                continue
            stack.append(edge.target)
            on_path.add(edge.target)
            visit(edge.target)
            on_path.discard(edge.target)
            stack.pop()

    visit(src)
    return marked


def dump_paths_jsonl(paths: list[Path]) -> str:
    """Line-delimited path export consumed by the dashboard's path explorer."""
    return "".join(json.dumps(p.to_dict(), ensure_ascii=False) + "\n" for p in paths)
