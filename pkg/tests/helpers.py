"""Shared test utilities: independent reference evaluator and graph builders.

The reference evaluator works on dense matrices with none of the library's
incremental machinery, so it can serve as an oracle for the fast paths.
"""

from __future__ import annotations

import numpy as np

from dcex import DirectedGraph


def dense_adj(g: DirectedGraph) -> np.ndarray:
    adj = np.zeros((g.n_nodes, g.n_nodes))
    for s, d, w in zip(g.edge_src, g.edge_dst, g.edge_weight):
        adj[int(s), int(d)] = float(w)
    return adj


def reference_counts(adj: np.ndarray, members):
    """O_S, B_in, B_out computed by explicit double loops over a dense matrix."""
    members = set(members)
    n = adj.shape[0]
    o_s = b_in = b_out = 0.0
    for i in range(n):
        for j in range(n):
            if adj[i, j] == 0.0:
                continue
            if i in members and j in members:
                o_s += adj[i, j]
            elif i in members:
                b_out += adj[i, j]
            elif j in members:
                b_in += adj[i, j]
    return o_s, b_in, b_out


def reference_score(adj: np.ndarray, members, rho, n, mode="directed") -> float:
    """From-scratch criterion value; independent of the library implementation."""
    members = set(members)
    size = len(members)
    n_nodes = adj.shape[0]
    o_s, b_in, b_out = reference_counts(adj, members)
    b_s = b_in + b_out
    eff = rho * n_nodes - size
    if mode == "directed":
        q = (b_s + 1.0) / (abs(b_in - b_out) + 1.0)
    else:
        q = 1.0
    return size * eff * (o_s / size**2 - (q**n) * b_s / (size * eff)) if eff != 0 else (
        # at eff == 0 only the penalty term survives
        -(q**n) * b_s
    )


def directed_gnp(n: int, p: float, seed: int, max_weight: int = 1) -> DirectedGraph:
    """Random directed graph; each ordered pair present independently w.p. p.

    Integer weights in 1..max_weight keep float arithmetic exact in tests.
    """
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    if max_weight == 1:
        weights = np.ones(len(src))
    else:
        weights = rng.integers(1, max_weight + 1, size=len(src)).astype(float)
    edges = [(int(a), int(b), float(w)) for a, b, w in zip(src, dst, weights)]
    return DirectedGraph(n, edges)


def two_cliques_graph() -> DirectedGraph:
    """Two bidirectional 5-cliques joined by a single directed edge 0 -> 5."""
    edges = []
    for base in (0, 5):
        for i in range(5):
            for j in range(5):
                if i != j:
                    edges.append((base + i, base + j, 1.0))
    edges.append((0, 5, 1.0))
    return DirectedGraph(10, edges)


def undirected_components(g: DirectedGraph) -> list[list[int]]:
    seen = [False] * g.n_nodes
    comps = []
    for s in range(g.n_nodes):
        if seen[s]:
            continue
        stack = [s]
        seen[s] = True
        comp = []
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in g.adj_nbrs[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append(sorted(comp))
    return comps
