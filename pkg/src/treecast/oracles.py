"""Centralized reference answers used only for verification.

Everything here sees the whole graph at once; protocol code never calls in.
The forest oracle runs Kruskal's algorithm over augmented weights, whose
strict total order makes the minimum forest unique, so protocol output can
be compared edge-set against edge-set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

from .graphs import Graph, cut_edges, tree_of


@dataclass(frozen=True)
class OracleResult:
    forest: FrozenSet[Tuple[int, int]]
    total_aug: int
    components: int


def kruskal(graph: Graph) -> OracleResult:
    """The unique minimum spanning forest under augmented weights."""
    parent = {v: v for v in graph.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order = sorted(graph.edges, key=lambda e: graph.aug_of(*e))
    forest = []
    total = 0
    for a, b in order:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            forest.append((a, b))
            total += graph.aug_of(a, b)
    comps = len({find(v) for v in graph.nodes})
    return OracleResult(frozenset(forest), total, comps)


def is_spanning_forest(graph: Graph, marks=None) -> bool:
    """Marks form a cycle-free set that is maximal (spans each component)."""
    if marks is None:
        marks = graph.marks
    parent = {v: v for v in graph.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in marks:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False        # cycle
        parent[ra] = rb
    return all(find(a) == find(b) for a, b in graph.edges)


def min_cut_aug(graph: Graph, member: int, marks=None) -> Optional[int]:
    """Smallest augmented weight leaving the tree containing `member`."""
    t = tree_of(graph, member, marks)
    cut = cut_edges(graph, t)
    if not cut:
        return None
    return min(graph.aug_of(a, b) for a, b in cut)


def cut_edge_numbers(graph: Graph, member: int, marks=None) -> FrozenSet[int]:
    """Edge numbers of every edge leaving the tree containing `member`."""
    t = tree_of(graph, member, marks)
    return frozenset(graph.edge_number_of(a, b)
                     for a, b in cut_edges(graph, t))
