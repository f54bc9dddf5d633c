"""Quality criterion for local communities in directed graphs.

A candidate community is a node subset S.  Its quality combines internal
density with a penalty on boundary edges, where the penalty is inflated when
the boundary mixes incoming and outgoing directions:

    W(S) = |S| * e(S) * [ O_S / |S|^2  -  q^n * B_S / (|S| * e(S)) ]

with e(S) = rho*N - |S| (an effective complement size), O_S the weight of
edges internal to S, B_S = B_in + B_out the boundary weight, and

    q = (B_S + 1) / (|B_in - B_out| + 1)

the direction-consistency coefficient: q = 1 when every boundary edge points
the same way relative to S, growing to B_S + 1 when in- and out-flow balance.
In undirected mode q is fixed at 1 and the criterion reduces to the purely
density-based form.

The criterion is finite for any 1 <= |S| <= rho*N (at the very top,
e(S) = 0 and only the penalty term survives), and :func:`score` evaluates
that whole range.  The sampler explores the narrower *admissible* region
1 <= |S| and 2|S|/N < rho, which keeps e(S) > |S| > 0; moves that would
leave it are rejected outright.  This module also provides exact O(degree)
deltas for single-node moves, the hot path of the sampler.
"""

from __future__ import annotations

from dataclasses import dataclass

MODE_DIRECTED = "directed"
MODE_UNDIRECTED = "undirected"

# Slack for the admissibility inequality 2|S| < rho*N: values within this
# tolerance of the boundary count as on it (and are rejected).
_ADM_TOL = 1e-9


class CriterionDomainError(ValueError):
    """Scoring was requested for an inadmissible subset."""


class MoveRejected(Exception):
    """A proposed move would leave the admissible domain.

    Distinct from a numeric or usage error so callers can treat it as an
    automatic rejection.
    """


@dataclass(frozen=True)
class CriterionParams:
    """Criterion configuration: rho in (0, 1], penalty exponent n >= 0, mode."""

    rho: float = 0.8
    n: float = 5.0
    mode: str = MODE_DIRECTED

    def __post_init__(self):
        if not (0.0 < self.rho <= 1.0):
            raise ValueError(f"rho must be in (0, 1], got {self.rho}")
        if self.n < 0:
            raise ValueError(f"penalty exponent n must be >= 0, got {self.n}")
        if self.mode not in (MODE_DIRECTED, MODE_UNDIRECTED):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class Score:
    """Criterion evaluation: value W, coefficient q, and e(S) = rho*N - |S|."""

    value: float
    q_d: float
    effective_size_term: float


def is_admissible_size(size: int, n_nodes: int, rho: float) -> bool:
    """Sampler admissibility: 1 <= |S| and strictly 2|S|/N < rho."""
    return size >= 1 and rho * n_nodes - 2.0 * size > _ADM_TOL


def is_scorable_size(size: int, n_nodes: int, rho: float) -> bool:
    """Evaluability: the criterion is finite for 1 <= |S| <= rho*N."""
    return size >= 1 and rho * n_nodes - size > -_ADM_TOL


def max_admissible_size(n_nodes: int, rho: float) -> int:
    """Largest admissible |S| for a graph of n_nodes, or 0 if none exists."""
    k = int(rho * n_nodes / 2.0) + 1
    while k >= 1 and not is_admissible_size(k, n_nodes, rho):
        k -= 1
    return k


def q_coefficient(b_in: float, b_out: float) -> float:
    return (b_in + b_out + 1.0) / (abs(b_in - b_out) + 1.0)


def value_from_counts(o_s, b_in, b_out, size, n_nodes, params) -> float:
    """W from raw counts; no admissibility check (callers guarantee it)."""
    eff = params.rho * n_nodes - size
    if params.mode == MODE_DIRECTED:
        penalty = q_coefficient(b_in, b_out) ** params.n
    else:
        penalty = 1.0
    return eff * o_s / size - penalty * (b_in + b_out)


def score_from_counts(o_s, b_in, b_out, size, n_nodes, params) -> Score:
    q = q_coefficient(b_in, b_out) if params.mode == MODE_DIRECTED else 1.0
    eff = params.rho * n_nodes - size
    return Score(
        value=eff * o_s / size - (q ** params.n) * (b_in + b_out),
        q_d=q,
        effective_size_term=eff,
    )


class CommunityState:
    """A node subset with cached counts (O_S, B_in, B_out, |S|).

    Single-owner mutable: one sampler chain owns one state over a shared
    read-only graph.  ``in_set`` is a bytearray indexed by node id for cheap
    membership tests.
    """

    __slots__ = ("members", "in_set", "size", "o_s", "b_in", "b_out")

    def __init__(self, members, in_set, size, o_s, b_in, b_out):
        self.members = members
        self.in_set = in_set
        self.size = size
        self.o_s = o_s
        self.b_in = b_in
        self.b_out = b_out

    @classmethod
    def from_members(cls, g, members) -> "CommunityState":
        """Build a state by computing all counts from scratch."""
        mset = set(int(u) for u in members)
        for u in mset:
            if not (0 <= u < g.n_nodes):
                raise ValueError(f"member {u} out of range")
        in_set = bytearray(g.n_nodes)
        for u in mset:
            in_set[u] = 1
        o_s = 0.0
        b_out = 0.0
        b_in = 0.0
        for u in mset:
            for v, w in zip(g.out_nbrs[u], g.out_wts[u]):
                if in_set[v]:
                    o_s += w
                else:
                    b_out += w
            for v, w in zip(g.in_nbrs[u], g.in_wts[u]):
                if not in_set[v]:
                    b_in += w
        return cls(mset, in_set, len(mset), o_s, b_in, b_out)

    def counts(self) -> tuple[float, float, float, int]:
        return (self.o_s, self.b_in, self.b_out, self.size)

    def apply_move(self, u: int, direction: str, new_counts) -> None:
        """Commit a move previously evaluated by :func:`move_delta`."""
        if direction == "add":
            self.members.add(u)
            self.in_set[u] = 1
        else:
            self.members.remove(u)
            self.in_set[u] = 0
        self.o_s, self.b_in, self.b_out, self.size = new_counts

    def copy(self) -> "CommunityState":
        return CommunityState(
            set(self.members),
            bytearray(self.in_set),
            self.size,
            self.o_s,
            self.b_in,
            self.b_out,
        )


def score(g, state, params: CriterionParams) -> Score:
    """Evaluate the criterion on a subset.

    ``state`` may be a :class:`CommunityState` or any iterable of node ids.
    Raises :class:`CriterionDomainError` outside the finite range
    1 <= |S| <= rho*N; out-of-range subsets are never silently evaluated.
    """
    if not isinstance(state, CommunityState):
        state = CommunityState.from_members(g, state)
    if not is_scorable_size(state.size, g.n_nodes, params.rho):
        raise CriterionDomainError(
            f"|S|={state.size} outside the criterion's domain for "
            f"N={g.n_nodes}, rho={params.rho} (need 1 <= |S| <= rho*N)"
        )
    return score_from_counts(
        state.o_s, state.b_in, state.b_out, state.size, g.n_nodes, params
    )


def move_delta(g, state: CommunityState, u: int, direction: str, params):
    """Exact criterion change for adding/removing node ``u``.

    Returns ``(delta_w, (o_s, b_in, b_out, size))`` for the post-move state,
    computed in O(degree(u)).  Raises :class:`MoveRejected` when the move
    would leave the admissible domain, and ``ValueError`` on precondition
    violations (adding a member / removing a non-member).
    """
    in_set = state.in_set
    # Weight from u into S and from S into u; with no self-loops these sums
    # are identical whether or not u itself currently belongs to S.
    w_u_to_s = 0.0
    for v, w in zip(g.out_nbrs[u], g.out_wts[u]):
        if in_set[v]:
            w_u_to_s += w
    w_s_to_u = 0.0
    for v, w in zip(g.in_nbrs[u], g.in_wts[u]):
        if in_set[v]:
            w_s_to_u += w

    if direction == "add":
        if in_set[u]:
            raise ValueError(f"cannot add node {u}: already a member")
        new_size = state.size + 1
        if not is_admissible_size(new_size, g.n_nodes, params.rho):
            raise MoveRejected(f"adding {u} would make |S|={new_size} inadmissible")
        o_s = state.o_s + w_u_to_s + w_s_to_u
        b_out = state.b_out - w_s_to_u + (g.out_strength[u] - w_u_to_s)
        b_in = state.b_in - w_u_to_s + (g.in_strength[u] - w_s_to_u)
    elif direction == "remove":
        if not in_set[u]:
            raise ValueError(f"cannot remove node {u}: not a member")
        new_size = state.size - 1
        if new_size < 1:
            raise MoveRejected("cannot remove the last member")
        o_s = state.o_s - w_u_to_s - w_s_to_u
        b_out = state.b_out - (g.out_strength[u] - w_u_to_s) + w_s_to_u
        b_in = state.b_in - (g.in_strength[u] - w_s_to_u) + w_u_to_s
    else:
        raise ValueError(f"direction must be 'add' or 'remove', got {direction!r}")

    w_before = value_from_counts(
        state.o_s, state.b_in, state.b_out, state.size, g.n_nodes, params
    )
    w_after = value_from_counts(o_s, b_in, b_out, new_size, g.n_nodes, params)
    return w_after - w_before, (o_s, b_in, b_out, new_size)
