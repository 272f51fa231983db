"""Bernoulli stochastic block model: likelihood, MLE parameters, agglomerative fitting.

The model has no degree correction and is evaluated over unordered node pairs
i < j. Weighted graphs are rejected by the likelihood functions; binarize them
first (Graph.binarized). Fitting works on "units" that are either single
nodes (fit_sbm) or whole super nodes treated atomically (fit_sbm_supernodes),
where pair counts come from member counts, so the same profile likelihood
drives both the full and the compressed representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compression import PERIPHERY, SuperNodeAssignment, SuperNodeNetwork
from .graph import Graph
from .partition import Partition
from .rng import derive_seed

_MH_PROPOSALS = 10       # Metropolis proposals per merge before declaring a stall
_GREEDY_CANDIDATES = 16  # sampled pairs for the forced best-merge fallback


@dataclass(frozen=True)
class BlockModelParams:
    """K x K symmetric matrix of block-pair connection probabilities."""

    pi: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        object.__setattr__(self, "pi", pi)
        if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
            raise ValueError("pi must be square")
        if not np.allclose(pi, pi.T, atol=1e-12):
            raise ValueError("pi must be symmetric")
        if np.any(pi < -1e-12) or np.any(pi > 1 + 1e-12):
            raise ValueError("pi entries must lie in [0, 1]")
        pi.setflags(write=False)

    @property
    def k(self) -> int:
        return self.pi.shape[0]


def _require_unit_weights(g: Graph) -> None:
    if not g.is_unit_weighted:
        raise ValueError("weighted graphs are rejected by the Bernoulli block model; "
                         "binarize first")


def _block_counts(g: Graph, p: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Edge counts e_kl and pair counts n_kl between blocks (within pairs counted once)."""
    k = p.k
    z = p.labels
    lo, hi, _ = g.edge_arrays()
    e = np.zeros((k, k))
    np.add.at(e, (z[lo], z[hi]), 1.0)
    np.add.at(e, (z[hi], z[lo]), 1.0)
    e[np.diag_indices(k)] /= 2.0
    sizes = p.sizes().astype(np.float64)
    n = np.outer(sizes, sizes)
    n[np.diag_indices(k)] = sizes * (sizes - 1) / 2.0
    return e, n


def sbm_loglik(g: Graph, p: Partition, params: BlockModelParams) -> float:
    """Log of the Bernoulli SBM likelihood over unordered pairs i < j.

    Uses the 0*ln(0) := 0 convention; a pi entry of exactly 0 or 1 that
    conflicts with an observed pair yields -inf rather than an exception.
    """
    _require_unit_weights(g)
    if p.n_nodes != g.n_nodes:
        raise ValueError("partition length does not match graph")
    if params.k != p.k:
        raise ValueError(f"params have {params.k} blocks, partition has {p.k}")
    e, n = _block_counts(g, p)
    iu = np.triu_indices(p.k)
    ee, nn, pp = e[iu], n[iu], params.pi[iu]
    if np.any((pp <= 0) & (ee > 0)) or np.any((pp >= 1) & (ee < nn)):
        return float("-inf")
    out = 0.0
    pos = ee > 0
    out += float(np.sum(ee[pos] * np.log(pp[pos])))
    miss = (nn - ee) > 0
    out += float(np.sum((nn[miss] - ee[miss]) * np.log1p(-pp[miss])))
    return out


def estimate_pi(g: Graph, p: Partition) -> BlockModelParams:
    """Maximum-likelihood pi for a fixed partition: observed edges over possible pairs."""
    _require_unit_weights(g)
    if p.n_nodes != g.n_nodes:
        raise ValueError("partition length does not match graph")
    e, n = _block_counts(g, p)
    pi = np.divide(e, n, out=np.zeros_like(e), where=n > 0)
    return BlockModelParams(pi=pi)


def _pair_term(e: int, n: int) -> float:
    # profile-likelihood contribution of one block pair at the MLE probability
    if e <= 0 or n <= 0 or e >= n:
        return 0.0
    q = e / n
    return e * math.log(q) + (n - e) * math.log1p(-q)


class _IndexedPairs:
    """Set of block pairs supporting O(1) add/discard and uniform sampling."""

    __slots__ = ("_items", "_pos")

    def __init__(self):
        self._items: list[tuple[int, int]] = []
        self._pos: dict[tuple[int, int], int] = {}

    def add(self, pair):
        if pair not in self._pos:
            self._pos[pair] = len(self._items)
            self._items.append(pair)

    def discard(self, pair):
        idx = self._pos.pop(pair, None)
        if idx is None:
            return
        last = self._items.pop()
        if idx < len(self._items):
            self._items[idx] = last
            self._pos[last] = idx

    def sample(self, rng) -> tuple[int, int]:
        return self._items[int(rng.integers(len(self._items)))]

    def __len__(self) -> int:
        return len(self._items)


class _BlockState:
    """Sparse block-level sufficient statistics for the Bernoulli profile log-likelihood.

    Units are indivisible groups of original nodes: single nodes for the full
    fit, super nodes for the compressed fit. A block's pair budget n_kl comes
    from its total member count, so the likelihood is always the node-level
    Eq.-style Bernoulli objective restricted to unit-respecting partitions.
    Block pairs with zero edges contribute nothing at the MLE, so only
    connected pairs are stored. `loglik` is maintained incrementally by
    apply_merge/apply_move and can be audited with recompute_loglik().
    """

    def __init__(self, unit_adj: list[dict[int, int]], unit_self: list[int],
                 unit_sizes: list[int], labels=None):
        n_units = len(unit_adj)
        self.unit_adj = unit_adj
        self.unit_self = list(unit_self)
        self.unit_sizes = list(unit_sizes)
        if labels is None:
            labels = np.arange(n_units, dtype=np.int64)
        self.block_of = np.asarray(labels, dtype=np.int64).copy()
        self.n_b: dict[int, int] = {}
        self.members: dict[int, set[int]] = {}
        for u in range(n_units):
            b = int(self.block_of[u])
            self.n_b[b] = self.n_b.get(b, 0) + self.unit_sizes[u]
            self.members.setdefault(b, set()).add(u)
        self.e: dict[int, dict[int, int]] = {b: {} for b in self.n_b}
        for u in range(n_units):
            bu = int(self.block_of[u])
            if self.unit_self[u]:
                self.e[bu][bu] = self.e[bu].get(bu, 0) + self.unit_self[u]
            for v, cnt in unit_adj[u].items():
                if v < u:
                    continue
                bv = int(self.block_of[v])
                self.e[bu][bv] = self.e[bu].get(bv, 0) + cnt
                if bu != bv:
                    self.e[bv][bu] = self.e[bv].get(bu, 0) + cnt
        self.pairs: _IndexedPairs | None = None
        self.loglik = self.recompute_loglik()

    @classmethod
    def from_graph(cls, g: Graph, labels=None) -> "_BlockState":
        _require_unit_weights(g)
        n = g.n_nodes
        unit_adj: list[dict[int, int]] = [dict() for _ in range(n)]
        lo, hi, _ = g.edge_arrays()
        for u, v in zip(lo.tolist(), hi.tolist()):
            unit_adj[u][v] = 1
            unit_adj[v][u] = 1
        return cls(unit_adj, [0] * n, [1] * n, labels=labels)

    @classmethod
    def from_supernode_network(cls, sn: SuperNodeNetwork,
                               a: SuperNodeAssignment) -> "_BlockState":
        s = sn.graph.n_nodes
        unit_adj: list[dict[int, int]] = [dict() for _ in range(s)]
        lo, hi, w = sn.graph.edge_arrays()
        for u, v, ww in zip(lo.tolist(), hi.tolist(), w.tolist()):
            cnt = int(round(ww))
            if abs(ww - cnt) > 1e-9:
                raise ValueError("super-node SBM fit needs integer edge counts; "
                                 "the original graph must be unweighted")
            unit_adj[u][v] = cnt
            unit_adj[v][u] = cnt
        unit_self = [int(round(x)) for x in sn.internal_weight.tolist()]
        if np.max(np.abs(sn.internal_weight - np.asarray(unit_self))) > 1e-9:
            raise ValueError("super-node SBM fit needs integer internal counts")
        sizes = np.bincount(a.assign[a.assign != PERIPHERY], minlength=s)
        return cls(unit_adj, unit_self, sizes.tolist())

    @property
    def n_blocks(self) -> int:
        return len(self.n_b)

    def alive_blocks(self) -> list[int]:
        return sorted(self.n_b)

    def _npairs(self, r: int, s: int) -> int:
        if r == s:
            nr = self.n_b[r]
            return nr * (nr - 1) // 2
        return self.n_b[r] * self.n_b[s]

    def recompute_loglik(self) -> float:
        total = 0.0
        for r, row in self.e.items():
            for s, cnt in row.items():
                if s < r:
                    continue
                total += _pair_term(cnt, self._npairs(r, s))
        return total

    def build_pairs(self) -> None:
        self.pairs = _IndexedPairs()
        for r, row in self.e.items():
            for s in row:
                if r < s:
                    self.pairs.add((r, s))

    def drop_pairs(self) -> None:
        self.pairs = None

    def sample_pair(self, rng) -> tuple[int, int]:
        """A connected block pair uniformly at random; any pair if none are connected."""
        if self.pairs is not None and len(self.pairs):
            return self.pairs.sample(rng)
        ids = self.alive_blocks()
        i = int(rng.integers(len(ids)))
        j = int(rng.integers(len(ids) - 1))
        if j >= i:
            j += 1
        r, s = ids[i], ids[j]
        return (r, s) if r < s else (s, r)

    # -- merges --------------------------------------------------------------

    def merge_delta(self, r: int, s: int) -> float:
        nr, ns = self.n_b[r], self.n_b[s]
        er, es = self.e[r], self.e[s]
        e_rs = er.get(s, 0)
        nt = nr + ns
        old = _pair_term(er.get(r, 0), nr * (nr - 1) // 2)
        old += _pair_term(es.get(s, 0), ns * (ns - 1) // 2)
        old += _pair_term(e_rs, nr * ns)
        new = _pair_term(er.get(r, 0) + es.get(s, 0) + e_rs, nt * (nt - 1) // 2)
        for m in set(er) | set(es):
            if m == r or m == s:
                continue
            nm = self.n_b[m]
            erm, esm = er.get(m, 0), es.get(m, 0)
            old += _pair_term(erm, nr * nm) + _pair_term(esm, ns * nm)
            new += _pair_term(erm + esm, nt * nm)
        return new - old

    def apply_merge(self, r: int, s: int) -> int:
        """Merge blocks r and s; returns the surviving block id."""
        self.loglik += self.merge_delta(r, s)
        # relabel the smaller block for near-linear total merge cost
        if len(self.members[r]) < len(self.members[s]) or \
                (len(self.members[r]) == len(self.members[s]) and s < r):
            r, s = s, r
        er = self.e[r]
        es = self.e.pop(s)
        if self.pairs is not None:
            self.pairs.discard((min(r, s), max(r, s)))
        e_rs = er.pop(s, 0)
        es.pop(r, None)
        diag = er.get(r, 0) + es.pop(s, 0) + e_rs
        if diag:
            er[r] = diag
        else:
            er.pop(r, None)
        for m, cnt in es.items():
            er[m] = er.get(m, 0) + cnt
            em = self.e[m]
            em[r] = em.get(r, 0) + em.pop(s)
            if self.pairs is not None:
                self.pairs.discard((min(s, m), max(s, m)))
                self.pairs.add((min(r, m), max(r, m)))
        self.n_b[r] += self.n_b.pop(s)
        for u in self.members[s]:
            self.block_of[u] = r
        self.members[r] |= self.members.pop(s)
        return r

    # -- single-unit moves -----------------------------------------------------

    def _edge_counts_to_blocks(self, u: int) -> dict[int, int]:
        c: dict[int, int] = {}
        for v, cnt in self.unit_adj[u].items():
            b = int(self.block_of[v])
            c[b] = c.get(b, 0) + cnt
        return c

    def move_delta(self, u: int, s: int) -> float:
        if s == int(self.block_of[u]):
            return 0.0
        return self._move_delta_counts(u, s, self._edge_counts_to_blocks(u))

    def _move_delta_counts(self, u: int, s: int, c: dict[int, int]) -> float:
        r = int(self.block_of[u])
        sz = self.unit_sizes[u]
        own = self.unit_self[u]
        nr, ns = self.n_b[r], self.n_b[s]
        er, es = self.e[r], self.e[s]
        cr, cs = c.get(r, 0), c.get(s, 0)
        old = _pair_term(er.get(r, 0), nr * (nr - 1) // 2)
        old += _pair_term(es.get(s, 0), ns * (ns - 1) // 2)
        old += _pair_term(er.get(s, 0), nr * ns)
        new = _pair_term(er.get(r, 0) - cr - own, (nr - sz) * (nr - sz - 1) // 2)
        new += _pair_term(es.get(s, 0) + cs + own, (ns + sz) * (ns + sz - 1) // 2)
        new += _pair_term(er.get(s, 0) + cr - cs, (nr - sz) * (ns + sz))
        for m in set(er) | set(es) | set(c):
            if m == r or m == s:
                continue
            nm = self.n_b[m]
            cm = c.get(m, 0)
            erm, esm = er.get(m, 0), es.get(m, 0)
            old += _pair_term(erm, nr * nm) + _pair_term(esm, ns * nm)
            new += _pair_term(erm - cm, (nr - sz) * nm) + _pair_term(esm + cm, (ns + sz) * nm)
        return new - old

    def apply_move(self, u: int, s: int) -> None:
        r = int(self.block_of[u])
        if s == r:
            return
        if self.pairs is not None:
            raise RuntimeError("unit moves are not supported while pair sampling is active")
        c = self._edge_counts_to_blocks(u)
        self.loglik += self._move_delta_counts(u, s, c)
        er, es = self.e[r], self.e[s]
        cr, cs = c.get(r, 0), c.get(s, 0)
        own = self.unit_self[u]

        def bump(row: dict[int, int], key: int, delta: int) -> None:
            val = row.get(key, 0) + delta
            if val:
                row[key] = val
            else:
                row.pop(key, None)

        bump(er, r, -cr - own)
        bump(es, s, cs + own)
        d_rs = cr - cs
        bump(er, s, d_rs)
        bump(es, r, d_rs)
        for m, cm in c.items():
            if m in (r, s):
                continue
            em = self.e[m]
            bump(er, m, -cm)
            bump(em, r, -cm)
            bump(es, m, cm)
            bump(em, s, cm)
        self.n_b[r] -= self.unit_sizes[u]
        self.n_b[s] += self.unit_sizes[u]
        self.members[r].discard(u)
        self.members[s].add(u)
        self.block_of[u] = s


def _agglomerate_and_sweep(state: _BlockState, k: int, rng, sweeps: int) -> None:
    """Merge down to k blocks, then improve with unit-reassignment sweeps."""
    state.build_pairs()
    while state.n_blocks > k:
        merged = False
        for _ in range(_MH_PROPOSALS):
            r, s = state.sample_pair(rng)
            d = state.merge_delta(r, s)
            if d >= 0.0 or rng.random() < math.exp(d):
                state.apply_merge(r, s)
                merged = True
                break
        if not merged:
            best_d, best_pair = -math.inf, None
            for _ in range(min(_GREEDY_CANDIDATES, 4 * state.n_blocks)):
                pair = state.sample_pair(rng)
                d = state.merge_delta(*pair)
                if d > best_d or (d == best_d and (best_pair is None or pair < best_pair)):
                    best_d, best_pair = d, pair
            state.apply_merge(*best_pair)
    state.drop_pairs()

    n_units = len(state.unit_adj)
    alive = state.alive_blocks()
    for _ in range(sweeps):
        for u in rng.permutation(n_units).tolist():
            r = int(state.block_of[u])
            if len(state.members[r]) <= 1:
                continue  # moving would empty the block and change K
            cand = {int(state.block_of[v]) for v in state.unit_adj[u]}
            cand.add(alive[int(rng.integers(len(alive)))])
            cand.discard(r)
            best_d, best_s = 0.0, None
            for s in sorted(cand):
                d = state.move_delta(u, s)
                if d > best_d:
                    best_d, best_s = d, s
            if best_s is not None:
                state.apply_move(u, best_s)


def fit_sbm(g: Graph, k: int, rng_seed: int, sweeps: int = 10) -> tuple[Partition, float]:
    """Agglomerative profile-likelihood fit with k final blocks.

    Starting from N singleton blocks, random connected block pairs are merged
    under a unit-temperature Metropolis rule on the profile log-likelihood;
    when proposals stall, the best of a sampled candidate set is merged
    instead. Once k blocks remain, `sweeps` rounds of single-node
    reassignment accept only likelihood-increasing moves.
    """
    if k <= 0:
        raise ValueError("k must be >= 1")
    if k > g.n_nodes:
        raise ValueError(f"k ({k}) exceeds node count ({g.n_nodes})")
    rng = np.random.default_rng(rng_seed)
    state = _BlockState.from_graph(g)
    _agglomerate_and_sweep(state, k, rng, sweeps)
    partition = Partition.from_labels(state.block_of)
    loglik = sbm_loglik(g, partition, estimate_pi(g, partition))
    return partition, loglik


def fit_sbm_supernodes(sn: SuperNodeNetwork, a: SuperNodeAssignment, k: int,
                       rng_seed: int, sweeps: int = 10) -> tuple[Partition, float]:
    """Fit the Bernoulli SBM on the super-node representation, units kept atomic.

    Pair counts come from member counts and edge counts from the contracted
    weights, so this maximizes the node-level profile likelihood over all
    partitions that respect super-node boundaries (periphery excluded).
    Returns a partition over the S super nodes plus its log-likelihood.
    """
    s = sn.graph.n_nodes
    if k <= 0:
        raise ValueError("k must be >= 1")
    if k > s:
        raise ValueError(f"k ({k}) exceeds super-node count ({s})")
    rng = np.random.default_rng(rng_seed)
    state = _BlockState.from_supernode_network(sn, a)
    _agglomerate_and_sweep(state, k, rng, sweeps)
    return Partition.from_labels(state.block_of), state.recompute_loglik()


def _best_row(rows: list[dict]) -> dict:
    best = rows[0]
    for row in rows[1:]:
        if row["score"] > best["score"]:
            best = row
    return best


def _penalty_unit(n: int) -> float:
    pairs = n * (n - 1) // 2
    return math.log(pairs) / 2.0 if pairs >= 1 else 0.0


def select_k_scores(g: Graph, k_min: int, k_max: int, rng_seed: int,
                    sweeps: int = 10) -> list[dict]:
    """Fit every k in [k_min, k_max]; score by penalized profile log-likelihood.

    score(k) = loglik - K(K+1)/2 * ln(N(N-1)/2) / 2, a Bayesian-style
    per-parameter penalty standing in for full model selection.
    """
    if not 1 <= k_min <= k_max <= g.n_nodes:
        raise ValueError("need 1 <= k_min <= k_max <= N")
    pen = _penalty_unit(g.n_nodes)
    rows = []
    for k in range(k_min, k_max + 1):
        _, ll = fit_sbm(g, k, derive_seed(rng_seed, "select_k", k), sweeps=sweeps)
        rows.append({"k": k, "loglik": ll, "score": ll - (k * (k + 1) / 2.0) * pen})
    return rows


def select_k(g: Graph, k_min: int, k_max: int, rng_seed: int, sweeps: int = 10) -> int:
    """The k in [k_min, k_max] maximizing the penalized score; lowest k on ties."""
    return int(_best_row(select_k_scores(g, k_min, k_max, rng_seed, sweeps=sweeps))["k"])


def select_k_scores_supernodes(sn: SuperNodeNetwork, a: SuperNodeAssignment,
                               k_min: int, k_max: int, rng_seed: int,
                               sweeps: int = 10) -> list[dict]:
    """select_k_scores for the super-node representation (atomic units).

    The penalty uses the count of represented original nodes, since that is
    the population the likelihood's pair budget is drawn from.
    """
    s = sn.graph.n_nodes
    if not 1 <= k_min <= k_max <= s:
        raise ValueError("need 1 <= k_min <= k_max <= S")
    n_rep = int(np.sum(a.assign != PERIPHERY))
    pen = _penalty_unit(n_rep)
    rows = []
    for k in range(k_min, k_max + 1):
        _, ll = fit_sbm_supernodes(sn, a, k, derive_seed(rng_seed, "select_k", k),
                                   sweeps=sweeps)
        rows.append({"k": k, "loglik": ll, "score": ll - (k * (k + 1) / 2.0) * pen})
    return rows


def select_k_supernodes(sn: SuperNodeNetwork, a: SuperNodeAssignment, k_min: int,
                        k_max: int, rng_seed: int, sweeps: int = 10) -> int:
    rows = select_k_scores_supernodes(sn, a, k_min, k_max, rng_seed, sweeps=sweeps)
    return int(_best_row(rows)["k"])
