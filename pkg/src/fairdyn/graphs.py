"""Minimal weighted undirected graph container shared by the temporal
network snapshots and the centrality code."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class WeightedGraph:
    """Undirected graph with positive edge weights.

    Nodes are kept in insertion order; all algorithms that consume this
    structure sort nodes internally so results are label-stable.
    """

    nodes: list = field(default_factory=list)
    adj: dict = field(default_factory=dict)  # node -> {neighbor: weight}

    @classmethod
    def from_edges(cls, nodes, edges):
        """Build from an iterable of nodes and (u, v, weight) triples."""
        g = cls()
        for n in nodes:
            g.add_node(n)
        for u, v, w in edges:
            g.add_edge(u, v, w)
        return g

    def add_node(self, n):
        if n not in self.adj:
            self.nodes.append(n)
            self.adj[n] = {}

    def add_edge(self, u, v, weight):
        if u == v:
            raise ValueError(f"self-loop on node {u!r}")
        if weight <= 0:
            raise ValueError(f"non-positive weight {weight} on edge ({u!r}, {v!r})")
        self.add_node(u)
        self.add_node(v)
        self.adj[u][v] = weight
        self.adj[v][u] = weight

    def has_edge(self, u, v):
        return u in self.adj and v in self.adj[u]

    def weight(self, u, v):
        return self.adj[u][v]

    def neighbors(self, u):
        return self.adj[u]

    def degree(self, u):
        return len(self.adj[u])

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return sum(len(nbrs) for nbrs in self.adj.values()) // 2

    def edges(self):
        """Yield (u, v, weight) with each undirected edge reported once."""
        seen = set()
        for u in self.nodes:
            for v, w in self.adj[u].items():
                pair = frozenset((u, v))
                if pair in seen:
                    continue
                seen.add(pair)
                yield u, v, w

    def connected_components(self):
        """List of node lists, one per connected component."""
        seen = set()
        comps = []
        for start in self.nodes:
            if start in seen:
                continue
            comp = []
            stack = [start]
            seen.add(start)
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.adj[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            comps.append(comp)
        return comps
