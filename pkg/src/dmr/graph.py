"""Bipartite graphs, matchings and edge partitions.

Edges are plain ``(left, right)`` integer tuples. Left and right vertices
live in separate index spaces ``[0, n_left)`` and ``[0, n_right)``.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Edge = tuple[int, int]


class Side(enum.Enum):
    LEFT = "L"
    RIGHT = "R"


@dataclass(frozen=True)
class VertexId:
    side: Side
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"negative vertex index {self.index}")


@dataclass(frozen=True)
class BipartiteGraph:
    """A bipartite graph with an explicit edge order.

    The order of ``edges`` is part of the graph's identity: greedy
    protocols scan edges in this order.
    """

    n_left: int
    n_right: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.n_left < 0 or self.n_right < 0:
            raise ValueError("vertex counts must be non-negative")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for u, v in edges:
            if not (0 <= u < self.n_left and 0 <= v < self.n_right):
                raise ValueError(f"edge {(u, v)} out of range for {self.n_left}x{self.n_right} graph")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge {(u, v)}")
            seen.add((u, v))

    @property
    def n(self) -> int:
        return self.n_left + self.n_right

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_left)]
        for u, v in self.edges:
            adj[u].append(v)
        return adj


class Matching:
    """A vertex-disjoint set of edges, remembering insertion order.

    Equality ignores order. ``edges`` keeps the order in which edges were
    added, which is the canonical order used when a protocol truncates a
    matching.
    """

    __slots__ = ("edges", "_left", "_right")

    def __init__(self, edges: Iterable[Edge] = ()):
        self.edges: tuple[Edge, ...] = tuple((int(u), int(v)) for u, v in edges)
        self._left = {u for u, _ in self.edges}
        self._right = {v for _, v in self.edges}
        if len(self._left) != len(self.edges) or len(self._right) != len(self.edges):
            raise ValueError("edges share a vertex; not a matching")

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __contains__(self, edge) -> bool:
        return edge in self.as_set()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return self.as_set() == other.as_set()

    def __hash__(self) -> int:
        return hash(self.as_set())

    def __repr__(self) -> str:
        return f"Matching({list(self.edges)})"

    def as_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    def covers(self, edge: Edge) -> bool:
        """True if ``edge`` shares an endpoint with this matching."""
        return edge[0] in self._left or edge[1] in self._right

    def extended(self, edges: Iterable[Edge]) -> "Matching":
        return Matching(self.edges + tuple(edges))


@dataclass(frozen=True)
class EdgePartition:
    """Assignment of every edge of ``graph`` to one of ``k`` sites.

    ``assignment[t]`` is the site holding ``graph.edges[t]``.
    """

    graph: BipartiteGraph
    k: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("need at least one site")
        assignment = tuple(int(s) for s in self.assignment)
        object.__setattr__(self, "assignment", assignment)
        if len(assignment) != self.graph.m:
            raise ValueError(f"partition assigns {len(assignment)} edges, graph has {self.graph.m}")
        for s in assignment:
            if not 0 <= s < self.k:
                raise ValueError(f"site {s} out of range [0, {self.k})")

    @classmethod
    def by_left_vertex(cls, graph: BipartiteGraph, k: int, owner: Sequence[int]) -> "EdgePartition":
        """Left-vertex partition: every edge goes to the site owning its left endpoint."""
        if len(owner) != graph.n_left:
            raise ValueError("owner must list a site for every left vertex")
        return cls(graph, k, tuple(owner[u] for u, _ in graph.edges))

    @classmethod
    def round_robin(cls, graph: BipartiteGraph, k: int) -> "EdgePartition":
        return cls.by_left_vertex(graph, k, [u % k for u in range(graph.n_left)])

    def site_edges(self, site: int) -> list[Edge]:
        """Edges held by ``site``, in graph order."""
        return [e for e, s in zip(self.graph.edges, self.assignment) if s == site]

    def all_site_edges(self) -> list[list[Edge]]:
        out: list[list[Edge]] = [[] for _ in range(self.k)]
        for e, s in zip(self.graph.edges, self.assignment):
            out[s].append(e)
        return out

    def is_left_vertex_partition(self) -> bool:
        owner: dict[int, int] = {}
        for (u, _), s in zip(self.graph.edges, self.assignment):
            if owner.setdefault(u, s) != s:
                return False
        return True


def is_matching(graph: BipartiteGraph, edges: Iterable[Edge]) -> bool:
    """True iff ``edges`` is a subset of the graph's edges with no repeated vertex."""
    present = graph.edge_set()
    lefts, rights = set(), set()
    for e in edges:
        u, v = e
        if (u, v) not in present or u in lefts or v in rights:
            return False
        lefts.add(u)
        rights.add(v)
    return True


def maximum_matching(graph: BipartiteGraph) -> Matching:
    """Maximum-cardinality matching via Hopcroft-Karp.

    The result is ordered by left vertex index.
    """
    adj = graph.adjacency()
    n_left = graph.n_left
    pair_left = [-1] * n_left
    pair_right = [-1] * graph.n_right
    dist = [0] * n_left
    inf = n_left + 1

    def bfs() -> bool:
        queue = deque()
        for u in range(n_left):
            if pair_left[u] < 0:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = pair_right[v]
                if w < 0:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # iterative to survive long augmenting paths
        stack = [(root, iter(adj[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                w = pair_right[v]
                if w < 0:
                    path.append((u, v))
                    for pu, pv in path:
                        pair_left[pu] = pv
                        pair_right[pv] = pu
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, v))
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = inf
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in range(n_left):
            if pair_left[u] < 0:
                dfs(u)
    return Matching((u, pair_left[u]) for u in range(n_left) if pair_left[u] >= 0)


def greedy_maximal_matching(edge_sequence: Iterable[Edge], initial: Matching | Iterable[Edge] = ()) -> Matching:
    """Extend ``initial`` by scanning ``edge_sequence`` in order.

    Each edge is added when both endpoints are still free. The result is
    maximal with respect to the scanned edges.

    Raises:
        ValueError: if ``initial`` is not a matching.
    """
    if not isinstance(initial, Matching):
        initial = Matching(initial)
    lefts = {u for u, _ in initial.edges}
    rights = {v for _, v in initial.edges}
    added = []
    for u, v in edge_sequence:
        if u not in lefts and v not in rights:
            lefts.add(u)
            rights.add(v)
            added.append((u, v))
    return initial.extended(added) if added else initial


def approximation_ratio(candidate: Matching | Iterable[Edge], graph: BipartiteGraph) -> Fraction:
    """``|candidate| / |maximum matching|``; 1 for a graph without edges."""
    edges = list(candidate.edges if isinstance(candidate, Matching) else candidate)
    if not is_matching(graph, edges):
        raise ValueError("candidate is not a matching of the graph")
    opt = len(maximum_matching(graph))
    if opt == 0:
        return Fraction(1)
    return Fraction(len(edges), opt)


def is_maximal(graph: BipartiteGraph, matching: Matching) -> bool:
    """True iff no graph edge can be added to ``matching``."""
    return all(matching.covers(e) for e in graph.edges)


def maximum_matching_of_edges(edges: Sequence[Edge]) -> Matching:
    """Maximum matching of the subgraph spanned by ``edges``.

    Vertices are relabelled compactly in first-appearance order, so the
    cost does not depend on the size of the ambient graph. The result is
    ordered by first appearance of the left endpoint.
    """
    left_ids: dict[int, int] = {}
    right_ids: dict[int, int] = {}
    local = []
    for u, v in edges:
        local.append((left_ids.setdefault(u, len(left_ids)), right_ids.setdefault(v, len(right_ids))))
    lefts = list(left_ids)
    rights = list(right_ids)
    sub = maximum_matching(BipartiteGraph(len(lefts), len(rights), tuple(local)))
    return Matching((lefts[u], rights[v]) for u, v in sub.edges)
