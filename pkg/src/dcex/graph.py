"""Immutable directed-graph container with dual adjacency and edge-list I/O."""

from __future__ import annotations

import numpy as np


class GraphError(ValueError):
    """Base class for graph construction and parsing failures."""


class EdgeListParseError(GraphError):
    """A line of an edge-list file could not be parsed."""


class GraphValidationError(GraphError):
    """Edge data violates a structural constraint (self-loop, bad weight, bad id)."""


class DirectedGraph:
    """Directed, optionally weighted graph with both out- and in-adjacency.

    Nodes are dense integer ids ``0 .. n_nodes-1``; ``labels``, when present,
    maps them bijectively to external string names.  Duplicate (src, dst)
    pairs are merged by summing their weights.  Self-loops and non-positive
    weights are rejected.

    Instances are immutable after construction and safe to share between
    concurrent readers.  The per-node adjacency lists are plain Python lists
    because they sit on the hot path of the subset sampler.
    """

    __slots__ = (
        "n_nodes",
        "edge_src",
        "edge_dst",
        "edge_weight",
        "edge_count",
        "total_weight",
        "out_nbrs",
        "out_wts",
        "in_nbrs",
        "in_wts",
        "adj_nbrs",
        "out_strength",
        "in_strength",
        "labels",
        "meta",
        "_label_to_id",
    )

    def __init__(self, n_nodes, edges=(), labels=None, meta=None):
        n_nodes = int(n_nodes)
        if n_nodes < 0:
            raise GraphValidationError("n_nodes must be nonnegative")
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n_nodes:
                raise GraphValidationError(
                    f"got {len(labels)} labels for {n_nodes} nodes"
                )
            if len(set(labels)) != n_nodes:
                raise GraphValidationError("node labels must be unique")

        merged: dict[tuple[int, int], float] = {}
        for src, dst, w in edges:
            src = int(src)
            dst = int(dst)
            w = float(w)
            if not (0 <= src < n_nodes and 0 <= dst < n_nodes):
                raise GraphValidationError(
                    f"edge ({src}, {dst}) out of range for {n_nodes} nodes"
                )
            if src == dst:
                name = labels[src] if labels is not None else src
                raise GraphValidationError(f"self-loop at node {name!r}")
            if not np.isfinite(w) or w <= 0.0:
                raise GraphValidationError(
                    f"edge ({src}, {dst}) has non-positive weight {w}"
                )
            key = (src, dst)
            merged[key] = merged.get(key, 0.0) + w

        items = sorted(merged.items())
        self.n_nodes = n_nodes
        self.edge_count = len(items)
        self.edge_src = np.array([k[0] for k, _ in items], dtype=np.int64)
        self.edge_dst = np.array([k[1] for k, _ in items], dtype=np.int64)
        self.edge_weight = np.array([w for _, w in items], dtype=np.float64)
        self.total_weight = float(self.edge_weight.sum()) if items else 0.0

        out_nbrs = [[] for _ in range(n_nodes)]
        out_wts = [[] for _ in range(n_nodes)]
        in_nbrs = [[] for _ in range(n_nodes)]
        in_wts = [[] for _ in range(n_nodes)]
        for (src, dst), w in items:
            out_nbrs[src].append(dst)
            out_wts[src].append(w)
            in_nbrs[dst].append(src)
            in_wts[dst].append(w)
        # in_nbrs comes out sorted because items are sorted by (src, dst).
        self.out_nbrs = out_nbrs
        self.out_wts = out_wts
        self.in_nbrs = in_nbrs
        self.in_wts = in_wts
        self.adj_nbrs = [
            sorted(set(out_nbrs[u]) | set(in_nbrs[u])) for u in range(n_nodes)
        ]
        self.out_strength = [float(sum(ws)) for ws in out_wts]
        self.in_strength = [float(sum(ws)) for ws in in_wts]
        self.labels = labels
        self.meta = dict(meta) if meta else {}
        self._label_to_id = (
            {lab: i for i, lab in enumerate(labels)} if labels is not None else None
        )
        self._check_consistency()

    def _check_consistency(self):
        total_out = sum(self.out_strength)
        total_in = sum(self.in_strength)
        if not (
            abs(total_out - self.total_weight) <= 1e-9 * max(1.0, self.total_weight)
            and abs(total_in - self.total_weight) <= 1e-9 * max(1.0, self.total_weight)
        ):
            raise GraphValidationError(
                "degree sums inconsistent with total weight "
                f"(out={total_out}, in={total_in}, m={self.total_weight})"
            )

    # -- lookups ---------------------------------------------------------

    def label_of(self, node: int):
        """External name of a node id (the id itself if the graph is unlabeled)."""
        if self.labels is None:
            return int(node)
        return self.labels[node]

    def id_of(self, label) -> int:
        if self._label_to_id is None:
            raise KeyError("graph has no label table")
        return self._label_to_id[label]

    def edge_multiset(self) -> dict[tuple[int, int], float]:
        """Mapping (src, dst) -> weight; mainly for tests and comparisons."""
        return {
            (int(s), int(d)): float(w)
            for s, d, w in zip(self.edge_src, self.edge_dst, self.edge_weight)
        }

    def labeled_edges(self):
        """Iterate (src_label, dst_label, weight) in canonical order."""
        for s, d, w in zip(self.edge_src, self.edge_dst, self.edge_weight):
            yield self.label_of(int(s)), self.label_of(int(d)), float(w)

    def __repr__(self):
        return (
            f"DirectedGraph(n_nodes={self.n_nodes}, edges={self.edge_count}, "
            f"m={self.total_weight:g})"
        )


def load_edge_list(path, directed: bool = True) -> DirectedGraph:
    """Read a whitespace-separated edge list ``src dst [weight]``.

    Lines starting with ``#`` and blank lines are skipped.  Labels are
    arbitrary non-whitespace tokens and are assigned dense node ids in order
    of first appearance.  Duplicate (src, dst) lines have their weights
    summed.  With ``directed=False`` each line is stored as two opposite
    directed edges of equal weight.
    """
    labels: list[str] = []
    label_to_id: dict[str, int] = {}
    edges: list[tuple[int, int, float]] = []

    def node_id(tok: str) -> int:
        nid = label_to_id.get(tok)
        if nid is None:
            nid = len(labels)
            label_to_id[tok] = nid
            labels.append(tok)
        return nid

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            toks = stripped.split()
            if len(toks) not in (2, 3):
                raise EdgeListParseError(
                    f"{path}:{lineno}: expected 'src dst [weight]', got {stripped!r}"
                )
            if toks[0] == toks[1]:
                raise GraphValidationError(
                    f"{path}:{lineno}: self-loop at node {toks[0]!r}"
                )
            if len(toks) == 3:
                try:
                    w = float(toks[2])
                except ValueError:
                    raise EdgeListParseError(
                        f"{path}:{lineno}: bad weight {toks[2]!r}"
                    ) from None
                if not np.isfinite(w):
                    raise GraphValidationError(f"{path}:{lineno}: non-finite weight")
                if w < 0:
                    raise GraphValidationError(
                        f"{path}:{lineno}: negative weight {w}"
                    )
                if w == 0:
                    raise GraphValidationError(
                        f"{path}:{lineno}: zero-weight edge (omit the line instead)"
                    )
            else:
                w = 1.0
            u, v = node_id(toks[0]), node_id(toks[1])
            edges.append((u, v, w))
            if not directed:
                edges.append((v, u, w))

    return DirectedGraph(len(labels), edges, labels=tuple(labels) if labels else None)


def save_edge_list(g: DirectedGraph, path) -> None:
    """Write the edge multiset as ``src dst weight`` lines.

    Round-trips the labeled edge multiset through :func:`load_edge_list`.
    Isolated nodes do not appear in the format and are therefore dropped on
    reload.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for src, dst, w in g.labeled_edges():
            wtxt = str(int(w)) if w == int(w) else repr(w)
            fh.write(f"{src} {dst} {wtxt}\n")


def symmetrize(g: DirectedGraph) -> DirectedGraph:
    """Direction-blind companion graph with A'[i, j] = A[i, j] + A[j, i]."""
    merged: dict[tuple[int, int], float] = {}
    for s, d, w in zip(g.edge_src, g.edge_dst, g.edge_weight):
        s, d, w = int(s), int(d), float(w)
        merged[(s, d)] = merged.get((s, d), 0.0) + w
        merged[(d, s)] = merged.get((d, s), 0.0) + w
    edges = [(s, d, w) for (s, d), w in merged.items()]
    return DirectedGraph(g.n_nodes, edges, labels=g.labels)


def subgraph_complement(g: DirectedGraph, removed) -> tuple[DirectedGraph, list[int]]:
    """Induced subgraph on the nodes outside ``removed``.

    Returns the reindexed graph plus ``kept``, where new id ``i`` corresponds
    to old id ``kept[i]``.
    """
    removed = set(int(u) for u in removed)
    for u in removed:
        if not (0 <= u < g.n_nodes):
            raise GraphValidationError(f"removed node {u} out of range")
    kept = [u for u in range(g.n_nodes) if u not in removed]
    new_id = {old: new for new, old in enumerate(kept)}
    edges = [
        (new_id[int(s)], new_id[int(d)], float(w))
        for s, d, w in zip(g.edge_src, g.edge_dst, g.edge_weight)
        if int(s) in new_id and int(d) in new_id
    ]
    labels = tuple(g.labels[u] for u in kept) if g.labels is not None else None
    return DirectedGraph(len(kept), edges, labels=labels), kept
