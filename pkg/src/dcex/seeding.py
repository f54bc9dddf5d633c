"""Deterministic derivation of child seeds from a master seed."""

from __future__ import annotations

import numpy as np


def derive_seed(master: int, *path: int) -> int:
    """Derive a 64-bit child seed from a master seed and an integer path.

    Pure function of its arguments, so nested experiments (rounds, restarts,
    null replicates) stay reproducible without threading generator state
    through call sites.  The integer path segments must be nonnegative.
    """
    entropy = (int(master),) + tuple(int(p) for p in path)
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0])


def sample_without_replacement(total: int, count: int, rng) -> np.ndarray:
    """Uniformly sample ``count`` distinct integers from ``range(total)``.

    Floyd's algorithm: O(count) work and draws, no O(total) permutation, so
    it stays cheap when picking a sparse edge set out of ~N^2 slots.
    """
    if not (0 <= count <= total):
        raise ValueError(f"cannot pick {count} distinct values from {total}")
    if count == 0:
        return np.empty(0, dtype=np.int64)
    js = np.arange(total - count, total, dtype=np.int64)
    draws = rng.integers(0, js + 1)
    chosen: set[int] = set()
    out = []
    for j, t in zip(js.tolist(), draws.tolist()):
        if t in chosen:
            t = j
        chosen.add(t)
        out.append(t)
    return np.array(out, dtype=np.int64)
