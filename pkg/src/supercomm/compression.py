"""Super-node growth, contraction into the weighted super-node network, and map-back."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph
from .partition import Partition
from .seeding import SeedSet

PERIPHERY = -1
_UNASSIGNED = -2


@dataclass(frozen=True)
class SuperNodeAssignment:
    """Node-to-supernode map. assign[i] is a super-node index or PERIPHERY (-1).

    absorbed_at[i] is the neighborhood order at which node i was claimed
    (0 for seeds, -1 for periphery nodes).
    """

    assign: np.ndarray
    absorbed_at: np.ndarray
    o_max: int
    seed_of: tuple[int, ...]

    def __post_init__(self):
        self.assign.setflags(write=False)
        self.absorbed_at.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.assign)

    @property
    def n_supernodes(self) -> int:
        return len(self.seed_of)

    @property
    def periphery_count(self) -> int:
        return int(np.sum(self.assign == PERIPHERY))


@dataclass(frozen=True)
class SuperNodeNetwork:
    """Weighted S-node contracted graph (no self loops) plus retained weights.

    internal_weight[u] is the total weight of original edges with both
    endpoints inside super node u; periphery_edge_weight is the total weight
    of edges touching periphery nodes, which are excluded from the graph.
    """

    graph: Graph
    internal_weight: np.ndarray
    periphery_edge_weight: float

    def conservation_gap(self, original: Graph) -> float:
        """| cross + internal + periphery - total | relative to total weight."""
        total = original.total_weight
        carried = self.graph.total_weight + float(self.internal_weight.sum()) \
            + self.periphery_edge_weight
        if total == 0:
            return abs(carried)
        return abs(carried - total) / total


def grow_supernodes(g: Graph, seeds: SeedSet | Sequence[int], o_max: int,
                    consolidation_passes: int = 1) -> SuperNodeAssignment:
    """Grow super nodes around seeds by synchronized frontier expansion.

    At order o = 1..o_max every unassigned node adjacent to a node assigned at
    order < o is claimed by the super node with the largest total connecting
    edge weight into its current membership. The claimable set is frozen at
    the start of the round, but claims are settled in sub-passes: nodes with a
    strict best super node are assigned first and count toward the connection
    weights of the remaining contested nodes, so exact ties (ubiquitous at
    order 1 on unit-weight graphs) are informed by settled same-order
    neighbors before falling back to the lowest super-node index.

    Greedy first-adjacency claims misplace nodes whose only early contact is a
    foreign seed, so after the rounds each non-seed member may be handed, in
    `consolidation_passes` synchronized passes, to the super node it connects
    to most strongly (stay on ties). Every membership always keeps a same-
    super-node path of length <= o_max to its seed; consolidation moves that
    would break that are rolled back. Nodes left unassigned after o_max go to
    the periphery.
    """
    seed_list = list(seeds.seeds if isinstance(seeds, SeedSet) else seeds)
    if not seed_list:
        raise ValueError("seeds must be nonempty")
    if o_max < 1:
        raise ValueError("o_max must be >= 1")
    if consolidation_passes < 0:
        raise ValueError("consolidation_passes must be >= 0")
    seed_arr = np.asarray(seed_list, dtype=np.int64)
    if len(np.unique(seed_arr)) != len(seed_arr):
        raise ValueError("duplicate seed")
    if seed_arr.min() < 0 or seed_arr.max() >= g.n_nodes:
        raise ValueError("seed index out of range")

    n, s = g.n_nodes, len(seed_arr)
    assign = np.full(n, _UNASSIGNED, dtype=np.int64)
    absorbed = np.full(n, -1, dtype=np.int64)
    assign[seed_arr] = np.arange(s)
    absorbed[seed_arr] = 0

    src = np.repeat(np.arange(n), np.diff(g.indptr))
    dst = g.indices
    w = g.weights
    for o in range(1, o_max + 1):
        # a node unassigned after round o-1 has no assigned neighbor from
        # earlier rounds, so the round's claimable set is exactly the
        # unassigned neighbors of the previous round's assignees
        settled = assign >= 0
        edge_sel = settled[src] & (assign[dst] == _UNASSIGNED)
        if not edge_sel.any():
            break
        claimable = np.zeros(n, dtype=bool)
        claimable[dst[edge_sel]] = True
        # candidate (node, block) pairs are frozen at round start, which keeps
        # every winner within hop distance o of its seed
        cand_keys = np.unique(dst[edge_sel] * s + assign[src[edge_sel]])
        force_ties = False
        while claimable.any():
            mask = claimable[dst] & (assign[src] >= 0)
            key = dst[mask] * s + assign[src[mask]]
            uniq, inv = np.unique(key, return_inverse=True)
            sums = np.bincount(inv, weights=w[mask])
            keep = np.isin(uniq, cand_keys, assume_unique=True)
            uniq, sums = uniq[keep], sums[keep]
            order = np.lexsort((uniq % s, -sums, uniq // s))
            nk = (uniq // s)[order]
            bk = (uniq % s)[order]
            sk = sums[order]
            first = np.ones(len(order), dtype=bool)
            first[1:] = nk[1:] != nk[:-1]
            if not force_ties:
                # strict winner: best weight beats that node's runner-up
                runner_up = np.full(len(order), -np.inf)
                same_next = np.zeros(len(order), dtype=bool)
                same_next[:-1] = nk[:-1] == nk[1:]
                runner_up[:-1][same_next[:-1]] = sk[1:][same_next[:-1]]
                rows = np.flatnonzero(first & (sk > runner_up))
                if len(rows) == 0:
                    force_ties = True
                    continue
            else:
                rows = np.flatnonzero(first)
            assign[nk[rows]] = bk[rows]
            absorbed[nk[rows]] = o
            claimable[nk[rows]] = False
            if force_ties:
                break

    for _ in range(consolidation_passes):
        if not _consolidate(assign, absorbed, seed_arr, s, o_max, src, dst, w):
            break

    assign[assign == _UNASSIGNED] = PERIPHERY
    return SuperNodeAssignment(assign=assign, absorbed_at=absorbed, o_max=o_max,
                               seed_of=tuple(int(x) for x in seed_arr))


def _consolidate(assign, absorbed, seed_arr, s, o_max, src, dst, w) -> bool:
    """One synchronized strongest-connection pass over non-seed members.

    A node may switch to a super node only when it beats the current one's
    connection weight strictly and some neighboring member of the target sits
    within o_max - 1 hops of that target's seed; the mover's absorbed_at
    becomes that certified depth + 1, so hop distance to the seed stays
    bounded by o_max (graph distances are unaffected by other moves).
    Returns True when a move happened.
    """
    movable = assign >= 0
    movable[seed_arr] = False
    if not movable.any():
        return False
    evid = movable[dst] & (assign[src] >= 0)
    if not evid.any():
        return False
    key = dst[evid] * s + assign[src[evid]]
    certified = evid & (absorbed[src] >= 0) & (absorbed[src] < o_max)
    cand_keys = np.unique(dst[certified] * s + assign[src[certified]])
    uniq, inv = np.unique(key, return_inverse=True)
    sums = np.bincount(inv, weights=w[evid])
    cur_weight = np.zeros(len(assign))
    own = np.flatnonzero(np.isin(uniq, np.flatnonzero(movable) * s + assign[movable]))
    cur_weight[uniq[own] // s] = sums[own]
    keep = np.isin(uniq, cand_keys, assume_unique=True)
    uniq, sums = uniq[keep], sums[keep]
    order = np.lexsort((uniq % s, -sums, uniq // s))
    nk = (uniq // s)[order]
    bk = (uniq % s)[order]
    sk = sums[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = nk[1:] != nk[:-1]
    nodes = nk[first]
    blocks = bk[first]
    move = (sk[first] > cur_weight[nodes]) & (blocks != assign[nodes])
    if not move.any():
        return False
    movers = nodes[move]
    targets = blocks[move]
    # certificate depth for the movers: shortest settled path into the target
    new_absorbed = np.full(len(assign), np.iinfo(np.int64).max, dtype=np.int64)
    pending = np.zeros(len(assign), dtype=bool)
    pending[movers] = True
    target_of = np.full(len(assign), -1, dtype=np.int64)
    target_of[movers] = targets
    sel = certified & pending[dst] & (assign[src] == target_of[dst])
    np.minimum.at(new_absorbed, dst[sel], absorbed[src[sel]] + 1)
    assign[movers] = targets
    absorbed[movers] = new_absorbed[movers]
    return True


def contract(g: Graph, a: SuperNodeAssignment) -> SuperNodeNetwork:
    """Collapse g onto super nodes: W(u,v) = total weight of cross edges, no self loops."""
    if a.n_nodes != g.n_nodes:
        raise ValueError("assignment length does not match graph")
    s = a.n_supernodes
    lo, hi, w = g.edge_arrays()
    bu = a.assign[lo]
    bv = a.assign[hi]
    periph = (bu == PERIPHERY) | (bv == PERIPHERY)
    periphery_weight = float(w[periph].sum())
    inner = ~periph & (bu == bv)
    internal = np.bincount(bu[inner], weights=w[inner], minlength=s)
    cross = ~periph & (bu != bv)
    clo = np.minimum(bu[cross], bv[cross])
    chi = np.maximum(bu[cross], bv[cross])
    if len(clo):
        key = clo * s + chi
        uniq, inv = np.unique(key, return_inverse=True)
        wsum = np.bincount(inv, weights=w[cross])
        glo, ghi = uniq // s, uniq % s
    else:
        glo = ghi = np.zeros(0, dtype=np.int64)
        wsum = np.zeros(0)
    graph = Graph._from_canonical(glo, ghi, wsum, s, [str(u) for u in range(s)])
    return SuperNodeNetwork(graph=graph, internal_weight=internal,
                            periphery_edge_weight=periphery_weight)


def map_partition(sp: Partition, a: SuperNodeAssignment) -> Partition:
    """Map a super-node partition back onto the original N nodes.

    Periphery nodes (if any) receive one fresh dedicated label K(sp).
    """
    if sp.n_nodes != a.n_supernodes:
        raise ValueError(f"partition covers {sp.n_nodes} super nodes, "
                         f"assignment has {a.n_supernodes}")
    z = np.empty(a.n_nodes, dtype=np.int64)
    member = a.assign != PERIPHERY
    z[member] = sp.labels[a.assign[member]]
    if not member.all():
        z[~member] = sp.k
    return Partition(z)


# -- serialization -----------------------------------------------------------


def write_assignment_text(a: SuperNodeAssignment, g: Graph, dest) -> None:
    """Two-column "external_node_id supernode_index" text, "P" for periphery."""
    own = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        dest = open(dest, "w", encoding="utf-8")
        own = True
    try:
        for i in range(g.n_nodes):
            b = int(a.assign[i])
            dest.write(f"{g.labels[i]} {'P' if b == PERIPHERY else b}\n")
    finally:
        if own:
            dest.close()


def write_assignment_json(a: SuperNodeAssignment, g: Graph, dest) -> None:
    payload = {
        "schema": "supercomm-assignment-v1",
        "o_max": a.o_max,
        "seed_of": [g.labels[i] for i in a.seed_of],
        "assignments": {
            g.labels[i]: {
                "supernode": None if int(a.assign[i]) == PERIPHERY else int(a.assign[i]),
                "absorbed_at": None if int(a.absorbed_at[i]) < 0 else int(a.absorbed_at[i]),
            }
            for i in range(g.n_nodes)
        },
    }
    own = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        dest = open(dest, "w", encoding="utf-8")
        own = True
    try:
        json.dump(payload, dest, indent=2, sort_keys=True)
        dest.write("\n")
    finally:
        if own:
            dest.close()


def read_assignment_json(path, g: Graph) -> SuperNodeAssignment:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != "supercomm-assignment-v1":
        raise ValueError("not a supercomm assignment file")
    n = g.n_nodes
    assign = np.full(n, PERIPHERY, dtype=np.int64)
    absorbed = np.full(n, -1, dtype=np.int64)
    for lab, rec in payload["assignments"].items():
        i = g.index_of(lab)
        if rec["supernode"] is not None:
            assign[i] = rec["supernode"]
            absorbed[i] = rec["absorbed_at"]
    seed_of = tuple(g.index_of(lab) for lab in payload["seed_of"])
    return SuperNodeAssignment(assign=assign, absorbed_at=absorbed,
                               o_max=int(payload["o_max"]), seed_of=seed_of)
