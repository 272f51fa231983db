"""Seed selection for super nodes: CoreHD peeling and the highest-degree baseline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class SeedSet:
    """Ordered seed nodes plus the method that produced them.

    ``core_degrees[i]`` records the degree of seed i inside the 2-core at the
    moment it was selected; ``None`` marks seeds taken by the highest-degree
    fallback after the 2-core emptied. This trace makes every CoreHD choice
    auditable against a from-scratch 2-core recomputation.
    """

    seeds: tuple[int, ...]
    method: str
    s_requested: int
    core_degrees: tuple = field(default=())

    def __len__(self) -> int:
        return len(self.seeds)


def degree_seeds(g: Graph, s: int) -> SeedSet:
    """The s nodes of highest unweighted degree, ties broken by lowest index."""
    _check_s(g, s)
    deg = g.unweighted_degrees
    order = np.lexsort((np.arange(g.n_nodes), -deg))
    seeds = tuple(int(i) for i in order[:s])
    return SeedSet(seeds=seeds, method="degree", s_requested=s,
                   core_degrees=(None,) * len(seeds))


def corehd_seeds(g: Graph, s: int) -> SeedSet:
    """CoreHD: repeatedly take the highest-degree node of the current 2-core.

    After each removal the 2-core is re-peeled incrementally (equivalent to a
    from-scratch recomputation, since removing nodes can only shrink the
    core). If the 2-core empties before s seeds are found, the remaining
    seeds are the highest-degree unselected nodes of the original graph.
    Ties always break toward the lowest dense index.
    """
    _check_s(g, s)
    n = g.n_nodes
    indptr, indices = g.indptr, g.indices
    core_deg = g.unweighted_degrees.astype(np.int64)
    in_core = np.ones(n, dtype=bool)

    def peel(stack: list[int]) -> None:
        while stack:
            u = stack.pop()
            for v in indices[indptr[u]:indptr[u + 1]]:
                if in_core[v]:
                    core_deg[v] -= 1
                    if core_deg[v] < 2:
                        in_core[v] = False
                        stack.append(int(v))

    initial = list(np.flatnonzero(core_deg < 2))
    in_core[core_deg < 2] = False
    peel(initial)

    seeds: list[int] = []
    core_degrees: list = []
    selected = np.zeros(n, dtype=bool)
    while len(seeds) < s and in_core.any():
        members = np.flatnonzero(in_core)
        u = int(members[np.argmax(core_deg[members])])  # argmax keeps lowest index on ties
        seeds.append(u)
        core_degrees.append(int(core_deg[u]))
        selected[u] = True
        in_core[u] = False
        peel([u])

    if len(seeds) < s:
        remaining = np.flatnonzero(~selected)
        order = np.lexsort((remaining, -g.unweighted_degrees[remaining]))
        for idx in order[: s - len(seeds)]:
            seeds.append(int(remaining[idx]))
            core_degrees.append(None)

    return SeedSet(seeds=tuple(seeds), method="corehd", s_requested=s,
                   core_degrees=tuple(core_degrees))


def _check_s(g: Graph, s: int) -> None:
    if s < 1:
        raise ValueError("number of seeds must be >= 1")
    if s > g.n_nodes:
        raise ValueError(f"more seeds than nodes ({s} > {g.n_nodes})")
