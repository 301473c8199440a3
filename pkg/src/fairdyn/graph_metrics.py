"""Topological feature battery on network snapshots.

All fourteen node measures are computed exactly. Path-based measures
use distance 1/weight in weighted mode; isolates receive 0 everywhere
except the self-communicability measure, which is 1.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .graphs import WeightedGraph

CENTRALITY_KINDS = (
    "degree",
    "avg_neighbor_degree",
    "betweenness",
    "closeness",
    "load",
    "eigenvector",
    "current_flow_betweenness",
    "current_flow_closeness",
    "information",
    "subgraph",
    "laplacian",
    "pagerank",
    "cogsnet_weight_sum",
    "avg_neighbor_cogsnet_weight_sum",
)

_POWER_ITER_TOL = 1e-8
_POWER_ITER_CAP = 100_000


class ConvergenceError(RuntimeError):
    pass


def _distance(weight: float, weighted: bool) -> float:
    return 1.0 / weight if weighted else 1.0


def _dijkstra(graph, source, weighted):
    """Distances, shortest-path counts, and predecessor lists."""
    dist = {source: 0.0}
    sigma = {source: 1.0}
    preds = {source: []}
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in graph.neighbors(u).items():
            nd = d + _distance(w, weighted)
            old = dist.get(v)
            if old is None or nd < old - 1e-12:
                dist[v] = nd
                sigma[v] = sigma[u]
                preds[v] = [u]
                heapq.heappush(heap, (nd, v))
            elif abs(nd - old) <= 1e-12 and u not in preds[v] and v not in done:
                sigma[v] += sigma[u]
                preds[v].append(u)
    return dist, sigma, preds


def degree_centrality(graph, weighted=True):
    if weighted:
        return {u: float(sum(graph.neighbors(u).values())) for u in graph.nodes}
    return {u: float(graph.degree(u)) for u in graph.nodes}


def avg_neighbor_degree(graph, weighted=True):
    deg = degree_centrality(graph, weighted)
    out = {}
    for u in graph.nodes:
        nbrs = graph.neighbors(u)
        out[u] = sum(deg[v] for v in nbrs) / len(nbrs) if nbrs else 0.0
    return out


def _pair_norm(n: int) -> float:
    return (n - 1) * (n - 2) / 2.0


def betweenness_centrality(graph, weighted=True):
    """Brandes accumulation over shortest-path pair dependencies,
    normalized by (n-1)(n-2)/2."""
    n = graph.n_nodes
    bc = {u: 0.0 for u in graph.nodes}
    if n < 3:
        return bc
    for s in graph.nodes:
        dist, sigma, preds = _dijkstra(graph, s, weighted)
        order = sorted((d, u) for u, d in dist.items())
        delta = {u: 0.0 for u in dist}
        for _, w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    norm = _pair_norm(n)
    return {u: val / 2.0 / norm for u, val in bc.items()}


def load_centrality(graph, weighted=True):
    """Flow-splitting variant: the unit at each node drains toward the
    source, dividing equally among its shortest-path predecessors."""
    n = graph.n_nodes
    load = {u: 0.0 for u in graph.nodes}
    if n < 3:
        return load
    for s in graph.nodes:
        dist, _, preds = _dijkstra(graph, s, weighted)
        between = {u: 1.0 for u in dist}
        order = sorted((d, u) for u, d in dist.items())
        for d, v in reversed(order):
            if d <= 0:
                continue
            share = between[v] / len(preds[v])
            for x in preds[v]:
                if x != s:
                    between[x] += share
        for u in dist:
            if u != s:
                load[u] += between[u] - 1.0
    norm = _pair_norm(n)
    return {u: val / 2.0 / norm for u, val in load.items()}


def closeness_centrality(graph, weighted=True):
    """Component-restricted closeness scaled by reachable fraction."""
    n = graph.n_nodes
    out = {}
    for u in graph.nodes:
        dist, _, _ = _dijkstra(graph, u, weighted)
        r = len(dist)
        total = sum(dist.values())
        if r <= 1 or total <= 0 or n <= 1:
            out[u] = 0.0
        else:
            out[u] = ((r - 1) / total) * ((r - 1) / (n - 1))
    return out


def _component_matrices(graph, weighted):
    """Per-component (node list, adjacency matrix) pairs, nodes sorted."""
    for comp in graph.connected_components():
        nodes = sorted(comp)
        idx = {u: i for i, u in enumerate(nodes)}
        m = len(nodes)
        a = np.zeros((m, m))
        for u in nodes:
            for v, w in graph.neighbors(u).items():
                a[idx[u], idx[v]] = w if weighted else 1.0
        yield nodes, a


def eigenvector_centrality(graph, weighted=True):
    """Principal eigenvector per component via shifted power iteration,
    L2-normalized within each component; isolates get 0."""
    out = {}
    for nodes, a in _component_matrices(graph, weighted):
        m = len(nodes)
        if m == 1:
            out[nodes[0]] = 0.0
            continue
        shift = a.sum(axis=1).max() + 1.0
        mat = a + shift * np.eye(m)
        x = np.full(m, 1.0 / math.sqrt(m))
        for _ in range(_POWER_ITER_CAP):
            nxt = mat @ x
            nxt /= np.linalg.norm(nxt)
            if np.linalg.norm(nxt - x) < _POWER_ITER_TOL:
                x = nxt
                break
            x = nxt
        else:
            raise ConvergenceError(
                f"eigenvector power iteration did not converge in {_POWER_ITER_CAP} steps"
            )
        x = np.abs(x)
        for u, val in zip(nodes, x):
            out[u] = float(val)
    return out


def pagerank_centrality(graph, weighted=True, damping=0.85):
    n = graph.n_nodes
    if n == 0:
        return {}
    nodes = sorted(graph.nodes)
    idx = {u: i for i, u in enumerate(nodes)}
    a = np.zeros((n, n))
    for u in nodes:
        for v, w in graph.neighbors(u).items():
            a[idx[u], idx[v]] = w if weighted else 1.0
    strengths = a.sum(axis=1)
    dangling = strengths == 0
    x = np.full(n, 1.0 / n)
    for _ in range(_POWER_ITER_CAP):
        contrib = np.zeros(n)
        nz = ~dangling
        contrib[nz] = x[nz] / strengths[nz]
        nxt = damping * (a.T @ contrib) + damping * x[dangling].sum() / n + (1 - damping) / n
        if np.abs(nxt - x).sum() < _POWER_ITER_TOL:
            x = nxt
            break
        x = nxt
    else:
        raise ConvergenceError("pagerank iteration did not converge")
    x = x / x.sum()
    return {u: float(x[idx[u]]) for u in nodes}


def _grounded_potentials(a: np.ndarray) -> np.ndarray:
    """Potential matrix from the Laplacian with node 0 grounded."""
    m = a.shape[0]
    lap = np.diag(a.sum(axis=1)) - a
    c = np.zeros((m, m))
    c[1:, 1:] = np.linalg.inv(lap[1:, 1:])
    return c


def current_flow_betweenness_centrality(graph, weighted=True):
    n = graph.n_nodes
    out = {u: 0.0 for u in graph.nodes}
    if n < 3:
        return out
    norm = _pair_norm(n)
    for nodes, a in _component_matrices(graph, weighted):
        m = len(nodes)
        if m < 3:
            continue
        c = _grounded_potentials(a)
        eu, ev = np.nonzero(np.triu(a))
        wts = a[eu, ev]
        # per-edge potential differences for every unit s-t injection
        f = c[eu, :] - c[ev, :]  # (E, m)
        thr = np.zeros(m)
        for si in range(m):
            for ti in range(si + 1, m):
                cur = np.abs(wts * (f[:, si] - f[:, ti]))
                node_flow = np.zeros(m)
                np.add.at(node_flow, eu, cur)
                np.add.at(node_flow, ev, cur)
                node_flow *= 0.5
                node_flow[si] = 0.0
                node_flow[ti] = 0.0
                thr += node_flow
        for u, val in zip(nodes, thr):
            out[u] = float(val / norm)
    return out


def _resistance_closeness(nodes, resist, n):
    """Closeness-style score from a full pairwise resistance matrix."""
    m = len(nodes)
    out = {}
    for i, u in enumerate(nodes):
        total = resist[i].sum()
        if m <= 1 or total <= 0:
            out[u] = 0.0
        else:
            out[u] = ((m - 1) / total) * ((m - 1) / (n - 1)) if n > 1 else 0.0
    return out


def current_flow_closeness_centrality(graph, weighted=True):
    n = graph.n_nodes
    out = {}
    for nodes, a in _component_matrices(graph, weighted):
        m = len(nodes)
        if m == 1:
            out[nodes[0]] = 0.0
            continue
        c = _grounded_potentials(a)
        d = np.diag(c)
        resist = d[:, None] + d[None, :] - 2 * c
        out.update(_resistance_closeness(nodes, resist, n))
    return out


def information_centrality(graph, weighted=True):
    """Same effective-resistance quantity as current-flow closeness but
    computed through the rank-repaired (L + J) inverse."""
    n = graph.n_nodes
    out = {}
    for nodes, a in _component_matrices(graph, weighted):
        m = len(nodes)
        if m == 1:
            out[nodes[0]] = 0.0
            continue
        lap = np.diag(a.sum(axis=1)) - a
        b = np.linalg.inv(lap + np.ones((m, m)))
        d = np.diag(b)
        resist = d[:, None] + d[None, :] - 2 * b
        out.update(_resistance_closeness(nodes, resist, n))
    return out


def subgraph_centrality(graph, weighted=True):
    """Diagonal of the adjacency matrix exponential."""
    out = {}
    for nodes, a in _component_matrices(graph, weighted):
        vals, vecs = np.linalg.eigh(a)
        sc = (vecs ** 2) @ np.exp(vals)
        for u, val in zip(nodes, sc):
            out[u] = float(val)
    return out


def _laplacian_energy(strengths, sq_weight_sums):
    return float(np.sum(strengths ** 2) + 2 * sq_weight_sums)


def laplacian_centrality(graph, weighted=True):
    """Relative drop in Laplacian energy when the node is removed."""
    nodes = sorted(graph.nodes)
    strengths = {}
    for u in nodes:
        nbrs = graph.neighbors(u)
        strengths[u] = sum((w if weighted else 1.0) for w in nbrs.values())
    sq_total = sum(
        (w if weighted else 1.0) ** 2 for _, _, w in graph.edges()
    )
    energy = sum(s ** 2 for s in strengths.values()) + 2 * sq_total
    out = {}
    for u in nodes:
        if energy <= 0:
            out[u] = 0.0
            continue
        removed_sq = sum(
            (w if weighted else 1.0) ** 2 for w in graph.neighbors(u).values()
        )
        energy_rest = 0.0
        for v in nodes:
            if v == u:
                continue
            wv = graph.neighbors(v).get(u)
            s = strengths[v] - ((wv if weighted else 1.0) if wv is not None else 0.0)
            energy_rest += s ** 2
        energy_rest += 2 * (sq_total - removed_sq)
        out[u] = (energy - energy_rest) / energy
    return out


def cogsnet_weight_sum(graph, weighted=True):
    # always uses the raw snapshot weights regardless of mode
    return {u: float(sum(graph.neighbors(u).values())) for u in graph.nodes}


def avg_neighbor_cogsnet_weight_sum(graph, weighted=True):
    sums = cogsnet_weight_sum(graph)
    out = {}
    for u in graph.nodes:
        nbrs = graph.neighbors(u)
        out[u] = sum(sums[v] for v in nbrs) / len(nbrs) if nbrs else 0.0
    return out


_DISPATCH = {
    "degree": degree_centrality,
    "avg_neighbor_degree": avg_neighbor_degree,
    "betweenness": betweenness_centrality,
    "closeness": closeness_centrality,
    "load": load_centrality,
    "eigenvector": eigenvector_centrality,
    "current_flow_betweenness": current_flow_betweenness_centrality,
    "current_flow_closeness": current_flow_closeness_centrality,
    "information": information_centrality,
    "subgraph": subgraph_centrality,
    "laplacian": laplacian_centrality,
    "pagerank": pagerank_centrality,
    "cogsnet_weight_sum": cogsnet_weight_sum,
    "avg_neighbor_cogsnet_weight_sum": avg_neighbor_cogsnet_weight_sum,
}


def compute_centrality(graph: WeightedGraph, kind: str, weighted: bool = True) -> dict:
    try:
        fn = _DISPATCH[kind]
    except KeyError:
        raise ValueError(f"unsupported centrality kind {kind!r}") from None
    return fn(graph, weighted=weighted)


def all_centralities(graph: WeightedGraph, weighted: bool = True) -> dict:
    """kind -> {node -> value} for the full battery."""
    return {kind: compute_centrality(graph, kind, weighted) for kind in CENTRALITY_KINDS}
