"""Planted-partition stochastic block model sampling for ground-truth networks."""

from __future__ import annotations

import numpy as np

from .graph import Graph
from .partition import Partition


def planted_partition(n: int, k: int, p_in: float, p_out: float,
                      rng_seed: int) -> tuple[Graph, Partition]:
    """Sample a k-group planted partition graph and its planted labels.

    Groups are as even as possible (remainder nodes go to the first groups).
    Each unordered pair appears independently with probability p_in inside a
    group and p_out across groups. Isolated nodes are retained.
    """
    if not (n >= k >= 1):
        raise ValueError("need n >= k >= 1")
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise ValueError("need 0 <= p_out <= p_in <= 1")
    rng = np.random.default_rng(rng_seed)

    base, rem = divmod(n, k)
    sizes = [base + 1 if gi < rem else base for gi in range(k)]
    starts = np.concatenate([[0], np.cumsum(sizes)])
    labels = np.repeat(np.arange(k), sizes)

    lo_all: list[np.ndarray] = []
    hi_all: list[np.ndarray] = []
    for gi in range(k):
        m = sizes[gi]
        total = m * (m - 1) // 2
        picks = _sample_pair_indices(rng, total, p_in)
        if len(picks):
            i, j = _decode_triangular(picks, m)
            lo_all.append(starts[gi] + i)
            hi_all.append(starts[gi] + j)
    for ga in range(k):
        for gb in range(ga + 1, k):
            total = sizes[ga] * sizes[gb]
            picks = _sample_pair_indices(rng, total, p_out)
            if len(picks):
                a, b = np.divmod(picks, sizes[gb])
                lo_all.append(starts[ga] + a)
                hi_all.append(starts[gb] + b)

    if lo_all:
        lo = np.concatenate(lo_all)
        hi = np.concatenate(hi_all)
    else:
        lo = hi = np.zeros(0, dtype=np.int64)
    order = np.lexsort((hi, lo))
    g = Graph._from_canonical(lo[order], hi[order], np.ones(len(lo)), n)
    return g, Partition(labels)


def _sample_pair_indices(rng: np.random.Generator, total: int, p: float) -> np.ndarray:
    """Indices of a Bernoulli(p) subset of range(total), as a sorted unique array.

    Sampled as a binomial count followed by a uniform distinct draw, which is
    distributionally identical to independent per-pair coin flips.
    """
    if total == 0 or p == 0.0:
        return np.zeros(0, dtype=np.int64)
    if p == 1.0:
        return np.arange(total, dtype=np.int64)
    count = int(rng.binomial(total, p))
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if count > total // 2:
        return np.sort(rng.choice(total, size=count, replace=False)).astype(np.int64)
    # rejection top-up avoids materializing huge permutations
    chosen: np.ndarray = np.unique(rng.integers(0, total, size=count))
    while len(chosen) < count:
        extra = rng.integers(0, total, size=count - len(chosen))
        chosen = np.unique(np.concatenate([chosen, extra]))
    return chosen.astype(np.int64)


def _decode_triangular(p: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Map pair index p in [0, C(m,2)) to (i, j) with i < j, row-major order."""
    pf = p.astype(np.float64)
    i = np.floor(((2 * m - 1) - np.sqrt((2 * m - 1) ** 2 - 8.0 * pf)) / 2.0).astype(np.int64)
    # guard against float rounding at row boundaries
    cum = i * (2 * m - i - 1) // 2
    i = np.where(cum > p, i - 1, i)
    cum = i * (2 * m - i - 1) // 2
    nxt = (i + 1) * (2 * m - i - 2) // 2
    i = np.where(p >= nxt, i + 1, i)
    cum = i * (2 * m - i - 1) // 2
    j = p - cum + i + 1
    return i, j
