"""Iterated community extraction with a null-model significance stop rule.

Communities are pulled out one at a time: run restart chains on the current
residual graph, keep the best subset, and compare its criterion value with
the best values found by identical chains on randomized surrogates of the
residual.  If the observed value is not significantly better than chance the
loop stops; otherwise the community's nodes are removed and extraction
continues on the complement.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from statistics import median

import numpy as np

from .criterion import CriterionParams, Score, max_admissible_size
from .graph import DirectedGraph, GraphValidationError, subgraph_complement
from .sampler import ChainConfig, run_chain
from .seeding import derive_seed, sample_without_replacement

NULL_SAME_EDGE_COUNT = "same_edge_count"
NULL_DEGREE_PRESERVING = "degree_preserving"

STOP_NON_SIGNIFICANT = "non_significant"
STOP_MAX_COMMUNITIES = "max_communities"
STOP_GRAPH_EXHAUSTED = "graph_exhausted"

# Seed-path tags for derive_seed(master, round, tag, index).
_TAG_RESTART = 0
_TAG_NULL_GRAPH = 1
_TAG_NULL_CHAIN = 2


@dataclass(frozen=True)
class ExtractionConfig:
    """Full extraction setup.

    ``chain.seed`` acts as the master seed; every restart and null replicate
    derives its own seed from it (see :func:`dcex.seeding.derive_seed`).
    ``null_replicates=0`` disables the significance rule entirely: every
    community found is accepted until ``max_communities`` or exhaustion,
    which is the protocol used for fixed-count comparison studies.

    The empirical p-value cannot go below 1/(null_replicates + 1), so the
    rule needs at least 19 replicates before anything can clear the default
    0.05 cutoff.
    """

    criterion: CriterionParams = CriterionParams()
    chain: ChainConfig = ChainConfig()
    restarts: int = 5
    max_communities: int = 10
    null_replicates: int = 100
    null_model: str = NULL_SAME_EDGE_COUNT
    significance_quantile: float = 0.95

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_communities < 0:
            raise ValueError("max_communities must be >= 0")
        if self.null_replicates < 0:
            raise ValueError("null_replicates must be >= 0")
        if self.null_model not in (NULL_SAME_EDGE_COUNT, NULL_DEGREE_PRESERVING):
            raise ValueError(f"unknown null model {self.null_model!r}")
        if not (0.0 < self.significance_quantile < 1.0):
            raise ValueError("significance_quantile must be in (0, 1)")


@dataclass(frozen=True)
class ExtractedCommunity:
    """One accepted community, reported in the original graph's labels."""

    members: tuple
    score: Score
    null_scores: tuple[float, ...]
    empirical_p: float | None
    chain_steps: int
    chain_acceptance: float
    chain_stopped: str


@dataclass(frozen=True)
class ExtractionReport:
    communities: tuple[ExtractedCommunity, ...]
    stopped_reason: str
    n_nodes: int
    config: ExtractionConfig

    def member_sets(self) -> list[frozenset]:
        return [frozenset(c.members) for c in self.communities]

    def to_dict(self) -> dict:
        comms = []
        for c in self.communities:
            null_summary = None
            if c.null_scores:
                null_summary = {
                    "count": len(c.null_scores),
                    "min": min(c.null_scores),
                    "median": median(c.null_scores),
                    "max": max(c.null_scores),
                }
            comms.append(
                {
                    "members": list(c.members),
                    "size": len(c.members),
                    "w": c.score.value,
                    "q_d": c.score.q_d,
                    "effective_size_term": c.score.effective_size_term,
                    "empirical_p": c.empirical_p,
                    "null_scores": null_summary,
                    "chain": {
                        "steps": c.chain_steps,
                        "acceptance_rate": c.chain_acceptance,
                        "stopped": c.chain_stopped,
                    },
                }
            )
        return {
            "n_nodes": self.n_nodes,
            "stopped_reason": self.stopped_reason,
            "communities": comms,
            "config": asdict(self.config),
        }

    def save_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def empirical_p_value(observed: float, null_scores) -> float:
    """(1 + #{null >= observed}) / (1 + #nulls); always in (0, 1]."""
    null_scores = list(null_scores)
    ge = sum(1 for v in null_scores if v >= observed)
    return (1 + ge) / (1 + len(null_scores))


def randomize(g: DirectedGraph, model: str, seed: int) -> DirectedGraph:
    """Randomized surrogate of ``g`` under the given null model.

    ``same_edge_count``: a uniform simple directed graph on the same node
    set with the same number of edges, all weights 1; input weights other
    than 1 are discarded (flagged in ``meta["weights_discarded"]``).

    ``degree_preserving``: repeated directed double-edge swaps
    (a->b, c->d) => (a->d, c->b), keeping every node's in- and out-degree
    sequence exactly; weights travel with the source edge.  Targets
    10 * |E| accepted swaps; if the attempt budget runs out first (tiny or
    rigid graphs) the partially rewired graph is returned with the realized
    swap count recorded in ``meta``.
    """
    rng = np.random.default_rng(seed)
    if model == NULL_SAME_EDGE_COUNT:
        return _randomize_same_edge_count(g, rng)
    if model == NULL_DEGREE_PRESERVING:
        return _randomize_degree_preserving(g, rng)
    raise ValueError(f"unknown null model {model!r}")


def _randomize_same_edge_count(g, rng) -> DirectedGraph:
    n = g.n_nodes
    m = g.edge_count
    slots = n * (n - 1)
    picks = sample_without_replacement(slots, m, rng)
    src = picks // (n - 1) if n > 1 else picks
    rem = picks % (n - 1) if n > 1 else picks
    dst = rem + (rem >= src)
    edges = [(int(s), int(d), 1.0) for s, d in zip(src, dst)]
    weights_discarded = bool(np.any(g.edge_weight != 1.0))
    meta = {"null_model": NULL_SAME_EDGE_COUNT, "weights_discarded": weights_discarded}
    return DirectedGraph(n, edges, labels=g.labels, meta=meta)


def _randomize_degree_preserving(g, rng) -> DirectedGraph:
    if g.edge_count < 2:
        raise GraphValidationError(
            "degree_preserving randomization needs at least 2 edges"
        )
    edges = [
        [int(s), int(d), float(w)]
        for s, d, w in zip(g.edge_src, g.edge_dst, g.edge_weight)
    ]
    eset = {(e[0], e[1]) for e in edges}
    n_edges = len(edges)
    target = 10 * n_edges
    max_attempts = 20 * target
    accepted = 0
    attempts = 0
    block: list[int] = []
    bi = 0
    while accepted < target and attempts < max_attempts:
        if bi + 2 > len(block):
            block = rng.integers(0, n_edges, size=4096).tolist()
            bi = 0
        ia, ic = block[bi], block[bi + 1]
        bi += 2
        attempts += 1
        if ia == ic:
            continue
        a, b, wa = edges[ia]
        c, d, wc = edges[ic]
        # (a->b, c->d) => (a->d, c->b); skip no-ops, self-loops, duplicates.
        if a == c or b == d or a == d or c == b:
            continue
        if (a, d) in eset or (c, b) in eset:
            continue
        eset.discard((a, b))
        eset.discard((c, d))
        eset.add((a, d))
        eset.add((c, b))
        edges[ia][1] = d
        edges[ic][1] = b
        accepted += 1
    meta = {
        "null_model": NULL_DEGREE_PRESERVING,
        "target_swaps": target,
        "accepted_swaps": accepted,
        "attempts": attempts,
    }
    return DirectedGraph(
        g.n_nodes, [tuple(e) for e in edges], labels=g.labels, meta=meta
    )


def extract_all(
    g: DirectedGraph, config: ExtractionConfig, jobs: int = 1
) -> ExtractionReport:
    """Extract communities from ``g`` until the stop rule fires.

    Deterministic end to end for a fixed ``config.chain.seed`` (regardless
    of ``jobs``, which only fans the independent null-replicate chains out
    over worker processes).  The effective-size term of the criterion is
    evaluated against the node count of the *current residual* graph, which
    is the network actually being searched in each round.

    Null-replicate chains run with restarts=1 and the same budget as the
    observed chains; for a calibrated p-value use ``restarts=1`` on the
    observed side as well.
    """
    if g.n_nodes == 0:
        raise ValueError("cannot extract communities from an empty graph")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    master = config.chain.seed
    rho = config.criterion.rho
    residual = g
    orig_ids = list(range(g.n_nodes))
    communities: list[ExtractedCommunity] = []
    round_idx = 0
    while True:
        if len(communities) >= config.max_communities:
            reason = STOP_MAX_COMMUNITIES
            break
        if residual.n_nodes < 3 or max_admissible_size(residual.n_nodes, rho) < 1:
            reason = STOP_GRAPH_EXHAUSTED
            break

        best = None
        best_members = None
        for k in range(config.restarts):
            cc = replace(
                config.chain, seed=derive_seed(master, round_idx, _TAG_RESTART, k)
            )
            result = run_chain(residual, config.criterion, cc)
            members = tuple(sorted(result.best_state.members))
            if (
                best is None
                or result.best_score.value > best.best_score.value
                or (
                    result.best_score.value == best.best_score.value
                    and members < best_members
                )
            ):
                best = result
                best_members = members
        observed = best.best_score.value

        null_scores: list[float] = []
        empirical_p = None
        if config.null_replicates > 0:
            null_scores = _null_best_scores(residual, config, master, round_idx,
                                            jobs)
            empirical_p = empirical_p_value(observed, null_scores)
            if empirical_p > 1.0 - config.significance_quantile:
                reason = STOP_NON_SIGNIFICANT
                break

        members_resid = sorted(best.best_state.members)
        members_orig = [orig_ids[u] for u in members_resid]
        communities.append(
            ExtractedCommunity(
                members=tuple(g.label_of(u) for u in members_orig),
                score=best.best_score,
                null_scores=tuple(null_scores),
                empirical_p=empirical_p,
                chain_steps=best.steps_run,
                chain_acceptance=best.acceptance_rate,
                chain_stopped=best.stopped,
            )
        )
        residual, kept = subgraph_complement(residual, members_resid)
        orig_ids = [orig_ids[k] for k in kept]
        round_idx += 1

    return ExtractionReport(
        communities=tuple(communities),
        stopped_reason=reason,
        n_nodes=g.n_nodes,
        config=config,
    )


def _null_graph(residual, model, seed):
    if model == NULL_DEGREE_PRESERVING and residual.edge_count < 2:
        # Too rigid to swap: compare against the graph itself.
        return residual
    return randomize(residual, model, seed)


def _one_null_score(payload) -> float:
    """Randomize + chase one null replicate; module-level for pickling."""
    residual, config, graph_seed, chain_seed = payload
    ng = _null_graph(residual, config.null_model, graph_seed)
    nc = replace(config.chain, seed=chain_seed)
    return run_chain(ng, config.criterion, nc).best_score.value


def _null_best_scores(residual, config, master, round_idx, jobs) -> list[float]:
    payloads = [
        (
            residual,
            config,
            derive_seed(master, round_idx, _TAG_NULL_GRAPH, i),
            derive_seed(master, round_idx, _TAG_NULL_CHAIN, i),
        )
        for i in range(config.null_replicates)
    ]
    if jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_one_null_score, payloads, chunksize=4))
    return [_one_null_score(p) for p in payloads]
