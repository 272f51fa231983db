"""Immutable undirected weighted graph: edge-list ingestion, degrees, cores, neighborhoods.

Nodes carry dense indices 0..N-1 plus external string labels. Adjacency is
stored in CSR form with neighbors sorted ascending, which makes every
traversal in this package deterministic. Node sets are returned as plain
lists of dense indices (ordered, duplicate-free).
"""

from __future__ import annotations

import io
from collections.abc import Iterable, Sequence

import numpy as np


class EdgeListParseError(ValueError):
    """Malformed edge-list input. Carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Graph:
    """Undirected weighted graph with no self loops and strictly positive weights.

    Immutable after construction: the underlying arrays are marked read-only
    and instances are safe to share across concurrent readers.
    """

    __slots__ = ("n_nodes", "n_edges", "indptr", "indices", "weights", "labels",
                 "strengths", "_label_index", "_edge_cache")

    def __init__(self, indptr: np.ndarray, indices: np.ndarray, weights: np.ndarray,
                 labels: Sequence[str]):
        self.indptr = indptr
        self.indices = indices
        self.weights = weights
        self.n_nodes = len(indptr) - 1
        self.n_edges = len(indices) // 2
        self.labels = tuple(labels)
        if len(self.labels) != self.n_nodes:
            raise ValueError("label count does not match node count")
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._label_index) != self.n_nodes:
            raise ValueError("labels must be unique")
        strengths = np.zeros(self.n_nodes)
        if len(indices):
            np.add.at(strengths, np.repeat(np.arange(self.n_nodes), np.diff(indptr)), weights)
        self.strengths = strengths
        for arr in (self.indptr, self.indices, self.weights, self.strengths):
            arr.setflags(write=False)
        self._edge_cache = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, edges: Iterable[tuple], n_nodes: int | None = None,
                   labels: Sequence[str] | None = None) -> "Graph":
        """Build a graph from (u, v) or (u, v, w) tuples of dense indices.

        Duplicate and reciprocal pairs are merged by summing weights. Self
        loops and non-positive weights are rejected.
        """
        us, vs, ws = [], [], []
        for e in edges:
            if len(e) == 2:
                u, v = e
                w = 1.0
            else:
                u, v, w = e
            if u == v:
                raise ValueError(f"self loop on node {u}")
            us.append(u)
            vs.append(v)
            ws.append(w)
        u = np.asarray(us, dtype=np.int64)
        v = np.asarray(vs, dtype=np.int64)
        w = np.asarray(ws, dtype=np.float64)
        if n_nodes is None:
            n_nodes = int(max(u.max(), v.max())) + 1 if len(u) else 0
        if len(u) and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n_nodes):
            raise ValueError("edge endpoint out of range")
        if np.any(w <= 0):
            raise ValueError("edge weights must be strictly positive")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        if len(lo):
            key = lo * n_nodes + hi
            uniq, inv = np.unique(key, return_inverse=True)
            wsum = np.bincount(inv, weights=w)
            lo, hi = uniq // n_nodes, uniq % n_nodes
        else:
            wsum = w
        return cls._from_canonical(lo, hi, wsum, n_nodes, labels)

    @classmethod
    def _from_canonical(cls, lo: np.ndarray, hi: np.ndarray, w: np.ndarray,
                        n_nodes: int, labels: Sequence[str] | None = None) -> "Graph":
        # assumes unique canonical pairs lo < hi with positive weights
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        indices = dst[order].astype(np.int64)
        weights = ww[order]
        counts = np.bincount(src, minlength=n_nodes)
        indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        if labels is None:
            labels = [str(i) for i in range(n_nodes)]
        return cls(indptr, indices, weights, labels)

    # -- basic accessors --------------------------------------------------

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n_nodes:
            raise IndexError(f"node index {i} out of range [0, {self.n_nodes})")

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices and edge weights of node i (sorted by index)."""
        self._check_index(i)
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def degree(self, i: int) -> float:
        """Strength of node i: the sum of incident edge weights."""
        self._check_index(i)
        return float(self.strengths[i])

    def unweighted_degree(self, i: int) -> int:
        self._check_index(i)
        return int(self.indptr[i + 1] - self.indptr[i])

    @property
    def unweighted_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def total_strength(self) -> float:
        """Sum of all node strengths; equals twice the total edge weight."""
        return float(self.strengths.sum())

    @property
    def total_weight(self) -> float:
        return self.total_strength / 2.0

    @property
    def is_unit_weighted(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def label_of(self, i: int) -> str:
        self._check_index(i)
        return self.labels[i]

    def index_of(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"unknown node label {label!r}") from None

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Each unordered edge once, as arrays (lo, hi, weight) with lo < hi."""
        if self._edge_cache is None:
            src = np.repeat(np.arange(self.n_nodes), np.diff(self.indptr))
            mask = src < self.indices
            self._edge_cache = (src[mask], self.indices[mask], self.weights[mask])
        return self._edge_cache

    def binarized(self) -> "Graph":
        """Same structure with every edge weight set to 1.0."""
        lo, hi, w = self.edge_arrays()
        return Graph._from_canonical(lo.copy(), hi.copy(), np.ones(len(w)),
                                     self.n_nodes, self.labels)

    def subgraph(self, keep: Sequence[int]) -> "Graph":
        """Induced subgraph on `keep`, relabeled densely in the given order.

        External labels are preserved, so the label map of the result composes
        with the original graph's.
        """
        keep = np.asarray(list(keep), dtype=np.int64)
        if len(np.unique(keep)) != len(keep):
            raise ValueError("duplicate node in subgraph selection")
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        lo, hi, w = self.edge_arrays()
        mask = (remap[lo] >= 0) & (remap[hi] >= 0)
        nlo, nhi = remap[lo[mask]], remap[hi[mask]]
        swap = nlo > nhi
        nlo2 = np.where(swap, nhi, nlo)
        nhi2 = np.where(swap, nlo, nhi)
        labels = [self.labels[i] for i in keep]
        return Graph._from_canonical(nlo2, nhi2, w[mask].copy(), len(keep), labels)


# -- edge-list IO ----------------------------------------------------------


def parse_edge_list(source) -> Graph:
    """Parse whitespace-separated "u v" / "u v w" lines into a Graph.

    Lines beginning with '#' are comments. Reciprocal/duplicate edges are
    merged by summing weights, self loops are dropped (their endpoint is still
    registered as a node), and a missing weight defaults to 1.0. External ids
    are remapped to dense indices in first-appearance order.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        lines = io.StringIO(source)
    elif isinstance(source, io.RawIOBase) or isinstance(source, io.BufferedIOBase):
        lines = io.TextIOWrapper(source, encoding="utf-8")
    else:
        lines = source

    label_index: dict[str, int] = {}
    labels: list[str] = []

    def node_id(tok: str) -> int:
        idx = label_index.get(tok)
        if idx is None:
            idx = len(labels)
            label_index[tok] = idx
            labels.append(tok)
        return idx

    pair_weight: dict[tuple[int, int], float] = {}
    saw_data = False
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise EdgeListParseError(line_no, f"expected 'u v [w]', got {line!r}")
        if len(tokens) > 3:
            raise EdgeListParseError(line_no, f"too many tokens in {line!r}")
        if len(tokens) == 3:
            try:
                w = float(tokens[2])
            except ValueError:
                raise EdgeListParseError(line_no, f"non-numeric weight {tokens[2]!r}") from None
            if not np.isfinite(w) or w <= 0:
                raise EdgeListParseError(line_no, f"weight must be positive, got {tokens[2]!r}")
        else:
            w = 1.0
        saw_data = True
        u = node_id(tokens[0])
        v = node_id(tokens[1])
        if u == v:
            continue  # self loop dropped, endpoint registered
        key = (u, v) if u < v else (v, u)
        pair_weight[key] = pair_weight.get(key, 0.0) + w

    if not saw_data:
        raise ValueError("no edges")
    n = len(labels)
    if pair_weight:
        pairs = np.array(sorted(pair_weight), dtype=np.int64)
        w = np.array([pair_weight[tuple(p)] for p in pairs])
        lo, hi = pairs[:, 0], pairs[:, 1]
    else:
        lo = hi = np.zeros(0, dtype=np.int64)
        w = np.zeros(0)
    return Graph._from_canonical(lo, hi, w, n, labels)


def write_edge_list(g: Graph, dest) -> None:
    """Write a graph in the edge-list text format understood by parse_edge_list.

    Isolated nodes are emitted as self-loop lines, which the parser drops while
    still registering the node, so parse(write(g)) preserves (N, M, edges).
    """
    own = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        dest = open(dest, "w", encoding="utf-8")
        own = True
    try:
        degs = g.unweighted_degrees
        for i in np.flatnonzero(degs == 0):
            lab = g.labels[i]
            dest.write(f"{lab} {lab}\n")
        lo, hi, w = g.edge_arrays()
        for u, v, ww in zip(lo, hi, w):
            if ww == 1.0:
                dest.write(f"{g.labels[u]} {g.labels[v]}\n")
            else:
                dest.write(f"{g.labels[u]} {g.labels[v]} {ww!r}\n")
    finally:
        if own:
            dest.close()


# -- cores, neighborhoods, extraction ---------------------------------------


def k_core(g: Graph, k: int) -> list[int]:
    """Nodes of the k-core: recursively prune nodes of unweighted degree < k.

    Returns an ascending list; empty when the core is empty. The k-core is
    unique, so the result does not depend on pruning order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    deg = g.unweighted_degrees.astype(np.int64)
    alive = np.ones(g.n_nodes, dtype=bool)
    stack = list(np.flatnonzero(deg < k))
    alive[deg < k] = False
    indptr, indices = g.indptr, g.indices
    while stack:
        u = stack.pop()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if alive[v]:
                deg[v] -= 1
                if deg[v] < k:
                    alive[v] = False
                    stack.append(int(v))
    return [int(i) for i in np.flatnonzero(alive)]


def neighborhood(g: Graph, i: int, order: int) -> list[int]:
    """All nodes j != i within BFS hop distance <= order, in visit order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    g._check_index(i)
    seen = np.zeros(g.n_nodes, dtype=bool)
    seen[i] = True
    frontier = [i]
    out: list[int] = []
    indptr, indices = g.indptr, g.indices
    for _ in range(order):
        nxt: list[int] = []
        for u in frontier:
            for v in indices[indptr[u]:indptr[u + 1]]:
                if not seen[v]:
                    seen[v] = True
                    nxt.append(int(v))
        out.extend(nxt)
        if not nxt:
            break
        frontier = nxt
    return out


def bfs_distances(g: Graph, sources: Sequence[int], max_dist: int | None = None) -> np.ndarray:
    """Multi-source BFS hop distances; unreached nodes get -1."""
    dist = np.full(g.n_nodes, -1, dtype=np.int64)
    frontier = []
    for s in sources:
        g._check_index(s)
        if dist[s] != 0:
            dist[s] = 0
            frontier.append(int(s))
    d = 0
    indptr, indices = g.indptr, g.indices
    while frontier and (max_dist is None or d < max_dist):
        d += 1
        nxt = []
        for u in frontier:
            for v in indices[indptr[u]:indptr[u + 1]]:
                if dist[v] < 0:
                    dist[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return dist


def extract_core_subgraph(g: Graph) -> Graph:
    """Induced subgraph on nodes of degree >= 2, their neighbors, and next nearest neighbors.

    Relabels densely (ascending original index); external labels are kept so
    the result's label map composes with the original.
    """
    if g.n_nodes == 0:
        raise ValueError("degenerate graph: empty input")
    base = np.flatnonzero(g.unweighted_degrees >= 2)
    if len(base) == 0:
        raise ValueError("degenerate graph: no node of degree >= 2")
    dist = bfs_distances(g, list(base), max_dist=2)
    keep = np.flatnonzero(dist >= 0)
    return g.subgraph(keep)
