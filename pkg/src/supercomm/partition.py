"""Community assignments with dense labels, plus text/JSON serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class Partition:
    """Length-n community assignment with dense labels 0..K-1."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-d vector")
        if len(labels):
            uniq = np.unique(labels)
            if uniq[0] != 0 or uniq[-1] != len(uniq) - 1:
                raise ValueError("labels must be dense 0..K-1")
        labels.setflags(write=False)

    @classmethod
    def from_labels(cls, values: Sequence) -> "Partition":
        """Densify arbitrary hashable labels in first-appearance order."""
        mapping: dict = {}
        out = np.empty(len(values), dtype=np.int64)
        for i, v in enumerate(values):
            idx = mapping.get(v)
            if idx is None:
                idx = len(mapping)
                mapping[v] = idx
            out[i] = idx
        return cls(out)

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def write_partition_text(p: Partition, g: Graph, dest) -> None:
    """Two-column "external_node_id community_id" text."""
    if p.n_nodes != g.n_nodes:
        raise ValueError("partition length does not match graph")
    own = False
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        dest = open(dest, "w", encoding="utf-8")
        own = True
    try:
        for i in range(g.n_nodes):
            dest.write(f"{g.labels[i]} {int(p.labels[i])}\n")
    finally:
        if own:
            dest.close()


def write_partition_json(p: Partition, g: Graph, dest) -> None:
    if p.n_nodes != g.n_nodes:
        raise ValueError("partition length does not match graph")
    payload = {
        "schema": "supercomm-partition-v1",
        "k": p.k,
        "assignments": {g.labels[i]: int(p.labels[i]) for i in range(g.n_nodes)},
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


def read_partition_text(path, g: Graph) -> Partition:
    """Read the two-column format back into a Partition aligned with g."""
    values = np.full(g.n_nodes, -1, dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lab, comm = line.split()
            values[g.index_of(lab)] = int(comm)
    if np.any(values < 0):
        raise ValueError("partition file does not cover every node")
    return Partition(values)
