"""Graph model: identifiers, edge numbers, augmented weights, marked trees.

Nodes carry distinct positive integer IDs drawn from a bounded ID space.
Every undirected edge gets a canonical *edge number* (the two endpoint IDs
concatenated bitwise, smaller first), and every weighted edge gets an
*augmented weight* (raw weight concatenated with the edge number), which makes
all edge weights distinct and totally ordered while preserving the raw-weight
order.  Trees are represented implicitly by symmetric mark bits on edges: the
tree of a node is the maximal marked-connected component containing it.

`cut_edges` is a test/benchmark oracle; protocol code never calls it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

Edge = Tuple[int, int]


class GraphError(Exception):
    pass


class InvalidEdgeError(GraphError):
    """Self-loop, duplicate edge, or edge with an unknown endpoint."""


class EncodingError(GraphError):
    """A value does not fit in its fixed-width field."""


class DomainError(GraphError):
    """An input is outside its documented domain."""


def canonical(u: int, v: int) -> Edge:
    """Canonical (min, max) form of an undirected edge."""
    return (u, v) if u < v else (v, u)


def edge_number(u: int, v: int, id_bits: int) -> int:
    """Concatenate the two endpoint IDs, smaller first, in id_bits fields."""
    if u == v:
        raise InvalidEdgeError(f"self loop at {u}")
    if u < 1 or v < 1:
        raise DomainError("node ids are positive")
    lim = 1 << id_bits
    if u >= lim or v >= lim:
        raise EncodingError(f"id does not fit in {id_bits} bits")
    a, b = (u, v) if u < v else (v, u)
    return (a << id_bits) | b


def edge_from_number(en: int, id_bits: int) -> Edge:
    """Inverse of edge_number."""
    mask = (1 << id_bits) - 1
    return (en >> id_bits, en & mask)


def augmented_weight(weight: int, en: int, en_bits: int,
                     max_weight: Optional[int] = None) -> int:
    """Concatenate a raw weight with an edge number into one orderable value."""
    if weight < 1 or (max_weight is not None and weight > max_weight):
        raise DomainError(f"weight {weight} out of range")
    if en < 0 or en >= (1 << en_bits):
        raise EncodingError(f"edge number does not fit in {en_bits} bits")
    return (weight << en_bits) | en


def split_augmented(aug: int, en_bits: int) -> Tuple[int, int]:
    """Split an augmented weight back into (raw weight, edge number)."""
    return (aug >> en_bits, aug & ((1 << en_bits) - 1))


class Graph:
    """Immutable undirected weighted graph with an optional mark state.

    Node IDs are distinct integers in [1, id_bound]; id_bound defaults to
    max(n^2, largest ID present) so generator-assigned IDs (random injection
    into [1, n^2]) and hand-written fixtures both fit.  Weights are integers
    in [1, u].  `marks` is a frozenset of canonical edge pairs — the
    both-endpoints-agree mark state.  Mutation happens by constructing a new
    Graph (`with_marks`, `delete_edge`, `insert_edge`, `reweight`).
    """

    __slots__ = ("nodes", "edges", "u", "marks", "adj", "n",
                 "id_bound", "id_bits", "en_bits", "aug_bits")

    def __init__(self, nodes: Iterable[int], edges: Dict[Edge, int], u: int,
                 marks: Iterable[Edge] = (), id_bound: Optional[int] = None):
        nodes = tuple(sorted(nodes))
        if len(set(nodes)) != len(nodes):
            raise DomainError("duplicate node ids")
        if nodes and nodes[0] < 1:
            raise DomainError("node ids are positive")
        if u < 1:
            raise DomainError("max weight u must be >= 1")
        self.nodes = nodes
        self.n = len(nodes)
        self.u = u
        node_set = frozenset(nodes)
        canon: Dict[Edge, int] = {}
        for (a, b), w in edges.items():
            e = canonical(a, b)
            if a == b:
                raise InvalidEdgeError(f"self loop at {a}")
            if e in canon:
                raise InvalidEdgeError(f"duplicate edge {e}")
            if a not in node_set or b not in node_set:
                raise InvalidEdgeError(f"edge {e} has unknown endpoint")
            if not 1 <= w <= u:
                raise DomainError(f"weight {w} of edge {e} out of [1, {u}]")
            canon[e] = w
        self.edges = canon
        mk = frozenset(canonical(a, b) for (a, b) in marks)
        for e in mk:
            if e not in canon:
                raise InvalidEdgeError(f"marked pair {e} is not an edge")
        self.marks = mk
        adj: Dict[int, Dict[int, int]] = {v: {} for v in nodes}
        for (a, b), w in sorted(canon.items()):
            adj[a][b] = w
            adj[b][a] = w
        self.adj = adj
        bound = max(self.n * self.n, nodes[-1] if nodes else 1, 1)
        if id_bound is not None:
            if nodes and id_bound < nodes[-1]:
                raise DomainError("id_bound below an actual id")
            bound = max(bound, id_bound)
        self.id_bound = bound
        self.id_bits = (bound).bit_length()
        self.en_bits = 2 * self.id_bits
        self.aug_bits = u.bit_length() + self.en_bits

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_number_of(self, u: int, v: int) -> int:
        return edge_number(u, v, self.id_bits)

    def aug_of(self, u: int, v: int) -> int:
        e = canonical(u, v)
        return augmented_weight(self.edges[e], self.edge_number_of(u, v),
                                self.en_bits)

    def max_aug_bound(self) -> int:
        """Largest augmented weight any edge of this graph could carry."""
        return (self.u << self.en_bits) | ((1 << self.en_bits) - 1)

    def with_marks(self, marks: Iterable[Edge]) -> "Graph":
        return Graph(self.nodes, self.edges, self.u, marks, self.id_bound)

    def delete_edge(self, u: int, v: int) -> "Graph":
        e = canonical(u, v)
        if e not in self.edges:
            raise InvalidEdgeError(f"no edge {e}")
        edges = dict(self.edges)
        del edges[e]
        return Graph(self.nodes, edges, self.u,
                     self.marks - {e}, self.id_bound)

    def insert_edge(self, u: int, v: int, w: int) -> "Graph":
        e = canonical(u, v)
        if e in self.edges:
            raise InvalidEdgeError(f"edge {e} already present")
        edges = dict(self.edges)
        edges[e] = w
        return Graph(self.nodes, edges, self.u, self.marks, self.id_bound)

    def reweight(self, u: int, v: int, w: int) -> "Graph":
        e = canonical(u, v)
        if e not in self.edges:
            raise InvalidEdgeError(f"no edge {e}")
        edges = dict(self.edges)
        edges[e] = w
        return Graph(self.nodes, edges, self.u, self.marks, self.id_bound)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, u={self.u}, marked={len(self.marks)})"


@dataclass(frozen=True)
class TreeView:
    """One maximal marked component, rooted for traversal convenience."""
    root: int
    members: FrozenSet[int]
    adj: Dict[int, Tuple[int, ...]]

    @property
    def size(self) -> int:
        return len(self.members)


def tree_of(g: Graph, x: int, marks: Optional[Iterable[Edge]] = None) -> TreeView:
    """Maximal marked component containing x (BFS over marked edges)."""
    mk = g.marks if marks is None else frozenset(canonical(a, b) for a, b in marks)
    tadj: Dict[int, List[int]] = {x: []}
    seen = {x}
    frontier = [x]
    while frontier:
        nxt = []
        for v in frontier:
            for nb in g.adj[v]:
                if canonical(v, nb) in mk:
                    if nb not in seen:
                        seen.add(nb)
                        tadj[nb] = []
                        nxt.append(nb)
                    if nb not in tadj[v]:
                        tadj[v].append(nb)
        frontier = nxt
    return TreeView(root=x, members=frozenset(seen),
                    adj={v: tuple(sorted(ns)) for v, ns in tadj.items()})


def cut_edges(g: Graph, t: TreeView, j: int = 0,
              k: Optional[int] = None) -> Set[Edge]:
    """Edges with exactly one endpoint in t and augmented weight in [j, k].

    Reference oracle for tests and experiment checks; protocol code never
    calls it.
    """
    if k is None:
        k = g.max_aug_bound()
    out = set()
    for (a, b) in g.edges:
        if (a in t.members) != (b in t.members):
            if j <= g.aug_of(a, b) <= k:
                out.add((a, b))
    return out


def properly_marked(marked_by: Dict[int, Set[int]]) -> bool:
    """True iff per-endpoint mark bits are symmetric (both or neither)."""
    for v, s in marked_by.items():
        for nb in s:
            if v not in marked_by.get(nb, ()):
                return False
    return True


def marked_components(g: Graph, marks: Optional[Iterable[Edge]] = None
                      ) -> List[FrozenSet[int]]:
    """All maximal marked components, as frozensets of node ids."""
    mk = g.marks if marks is None else frozenset(canonical(a, b) for a, b in marks)
    g2 = g if marks is None else g.with_marks(mk)
    comps = []
    left = set(g.nodes)
    while left:
        t = tree_of(g2, next(iter(sorted(left))))
        comps.append(t.members)
        left -= t.members
    return comps


# --- text formats ------------------------------------------------------------
#
# Graph file: first line "n m u", then m lines "a b w".  The node set is the
# union of endpoint ids, so only graphs whose nodes all touch an edge are
# expressible (isolated nodes have no line to live on).  Mark state: one
# "a b" line per marked edge.

def format_graph_text(g: Graph) -> str:
    seen = set()
    for a, b in g.edges:
        seen.add(a)
        seen.add(b)
    if seen != set(g.nodes):
        raise DomainError("text format cannot express isolated nodes")
    lines = [f"{g.n} {g.m} {g.u}"]
    for (a, b), w in sorted(g.edges.items()):
        lines.append(f"{a} {b} {w}")
    return "\n".join(lines) + "\n"


def parse_graph_text(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 3:
        raise DomainError("expected header 'n m u'")
    n, m, u = (int(x) for x in rows[0])
    if len(rows) - 1 != m:
        raise DomainError(f"header claims {m} edges, file has {len(rows) - 1}")
    edges: Dict[Edge, int] = {}
    nodes: Set[int] = set()
    for row in rows[1:]:
        if len(row) != 3:
            raise DomainError(f"bad edge line {' '.join(row)}")
        a, b, w = (int(x) for x in row)
        e = canonical(a, b)
        if e in edges:
            raise InvalidEdgeError(f"duplicate edge {e}")
        edges[e] = w
        nodes.add(a)
        nodes.add(b)
    if len(nodes) != n:
        raise DomainError(f"header claims {n} nodes, edges mention {len(nodes)}")
    return Graph(nodes, edges, u)


def format_marks_text(marks: Iterable[Edge]) -> str:
    pairs = sorted(canonical(a, b) for a, b in marks)
    return "".join(f"{a} {b}\n" for a, b in pairs)


def parse_marks_text(text: str) -> FrozenSet[Edge]:
    out = set()
    for ln in text.splitlines():
        if ln.strip():
            a, b = (int(x) for x in ln.split())
            out.add(canonical(a, b))
    return frozenset(out)
