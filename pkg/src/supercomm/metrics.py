"""Partition-comparison metrics: NMI, size rankings, Kendall tau, neighborhood AUC."""

from __future__ import annotations

import numpy as np
from scipy import stats

from .graph import Graph
from .partition import Partition


def nmi(p1: Partition, p2: Partition) -> float:
    """Normalized mutual information: MI over the mean of the two entropies.

    Natural logs. Two trivial single-community partitions are identical and
    score 1 by convention; otherwise zero mutual information scores 0.
    """
    if p1.n_nodes != p2.n_nodes:
        raise ValueError("partitions have different lengths")
    n = p1.n_nodes
    if n == 0:
        raise ValueError("empty partitions")
    a, b = p1.labels, p2.labels
    cont = np.zeros((p1.k, p2.k))
    np.add.at(cont, (a, b), 1.0)
    pxy = cont / n
    px = pxy.sum(axis=1)
    py = pxy.sum(axis=0)
    h1 = -np.sum(px[px > 0] * np.log(px[px > 0]))
    h2 = -np.sum(py[py > 0] * np.log(py[py > 0]))
    if h1 == 0.0 and h2 == 0.0:
        return 1.0
    mask = pxy > 0
    mi = np.sum(pxy[mask] * (np.log(pxy[mask]) - np.log(np.outer(px, py)[mask])))
    if mi <= 0.0:
        return 0.0
    return float(mi / ((h1 + h2) / 2.0))


def community_size_ranking(p: Partition) -> np.ndarray:
    """Per-node rank of the size of its community, with midranks for ties."""
    keys = p.sizes()[p.labels]
    return stats.rankdata(keys, method="average")


def kendall_tau(x, y) -> float:
    """Tie-corrected Kendall tau-b between two equal-length vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length 1-d vectors")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    tau = stats.kendalltau(x, y, variant="b").statistic
    if np.isnan(tau):
        raise ValueError("degenerate ranking: tau undefined for constant input")
    return float(tau)


def _auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Mann-Whitney AUC with midrank tie handling."""
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    ranks = stats.rankdata(scores, method="average")
    u = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def neighbor_community_distribution(g: Graph, p: Partition, i: int, order: int,
                                    exact_distance: bool = False) -> np.ndarray:
    """Fraction of i's order-neighborhood (distance <= order) in each community.

    With exact_distance=True only nodes at distance == order count. Returns an
    all-zero vector when the neighborhood is empty.
    """
    if p.n_nodes != g.n_nodes:
        raise ValueError("partition length does not match graph")
    from .graph import neighborhood, bfs_distances

    if not exact_distance:
        members = neighborhood(g, i, order)
    else:
        dist = bfs_distances(g, [i], max_dist=order)
        members = np.flatnonzero(dist == order).tolist()
    out = np.zeros(p.k)
    if not members:
        return out
    np.add.at(out, p.labels[np.asarray(members, dtype=np.int64)], 1.0)
    return out / len(members)


def _distribution_matrix(g: Graph, p: Partition, order: int,
                         exact_distance: bool = False) -> np.ndarray:
    """Row i = neighbor_community_distribution(g, p, i, order)."""
    n, k = g.n_nodes, p.k
    if order == 1 and not exact_distance:
        # one hop never revisits the start node, so plain edge accumulation works
        src = np.repeat(np.arange(n), np.diff(g.indptr))
        counts = np.zeros((n, k))
        np.add.at(counts, (src, p.labels[g.indices]), 1.0)
        totals = counts.sum(axis=1, keepdims=True)
        return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    rows = [neighbor_community_distribution(g, p, i, order, exact_distance)
            for i in range(n)]
    return np.vstack(rows) if rows else np.zeros((0, k))


def min_auc(g: Graph, p: Partition, order: int, exact_distance: bool = False) -> float:
    """Community-membership prediction from neighbor fractions, summarized by min AUC.

    For each community holding at least one positive and one negative example,
    the score of node i is its neighbor-distribution mass on that community
    and the label is membership; ties are handled by midranks (equivalent to
    sweeping the probability threshold with trapezoidal interpolation).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    dist = _distribution_matrix(g, p, order, exact_distance)
    sizes = p.sizes()
    n = g.n_nodes
    aucs = []
    for k in range(p.k):
        if sizes[k] < 1 or sizes[k] >= n:
            continue  # no positives or no negatives: AUC undefined, skipped
        aucs.append(_auc(dist[:, k], p.labels == k))
    if not aucs:
        raise ValueError("degenerate partition for AUC: no community has both classes")
    return min(aucs)
