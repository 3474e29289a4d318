"""Interference network and unit clustering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Dense N x N matrix of nonnegative interference weights h_ij.

    Not required to be symmetric. The diagonal is always zero.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"adjacency must be a non-empty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("adjacency weights must be finite")
        if np.any(w < 0):
            raise ValueError("adjacency weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("adjacency diagonal must be zero")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def edges(self) -> list[tuple[int, int, float]]:
        rows, cols = np.nonzero(self.weights)
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(rows, cols)]

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges()]}

    @classmethod
    def from_json(cls, data: dict) -> "AdjacencyMatrix":
        return build_adjacency(int(data["n"]), [tuple(e) for e in data.get("edges", [])])


def build_adjacency(n: int, entries: Iterable[Sequence[float]]) -> AdjacencyMatrix:
    """Build a validated adjacency matrix from ``(i, j, weight)`` triples.

    Entries not listed are zero. Repeated ``(i, j)`` pairs keep the last weight.
    """
    if n < 1:
        raise ValueError(f"unit count must be positive, got {n}")
    w = np.zeros((n, n))
    for entry in entries:
        i, j, weight = entry
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        if weight < 0:
            raise ValueError(f"negative weight {weight} on edge ({i}, {j})")
        if i == j and weight != 0:
            raise ValueError(f"nonzero diagonal entry at unit {i}")
        w[i, j] = float(weight)
    return AdjacencyMatrix(w)


def neighbor_weight_sum(H: AdjacencyMatrix, i: int) -> float:
    if not 0 <= i < H.n:
        raise IndexError(f"unit {i} out of range for n={H.n}")
    return float(H.weights[i].sum())


@dataclass(frozen=True)
class Clustering:
    """Partition of units 0..N-1 into clusters with contiguous ids 0..C-1."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) for x in self.assignment)
        if not a:
            raise ValueError("clustering must cover at least one unit")
        ids = set(a)
        if min(ids) != 0 or ids != set(range(len(ids))):
            raise ValueError(f"cluster ids must be contiguous from 0, got {sorted(ids)}")
        object.__setattr__(self, "assignment", a)

    @property
    def n(self) -> int:
        return len(self.assignment)

    @property
    def num_clusters(self) -> int:
        return max(self.assignment) + 1

    def members(self, q: int) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.assignment) if c == q)

    def clusters(self) -> list[tuple[int, ...]]:
        return [self.members(q) for q in range(self.num_clusters)]

    def sizes(self) -> list[int]:
        return [len(m) for m in self.clusters()]

    def to_json(self) -> dict:
        return {"assignment": list(self.assignment)}

    @classmethod
    def from_json(cls, data: dict) -> "Clustering":
        return cls(tuple(data["assignment"]))

    @classmethod
    def singletons(cls, n: int) -> "Clustering":
        return cls(tuple(range(n)))

    @classmethod
    def single(cls, n: int) -> "Clustering":
        return cls((0,) * n)


def cluster_of(clustering: Clustering, i: int) -> int:
    if not 0 <= i < clustering.n:
        raise IndexError(f"unit {i} out of range for n={clustering.n}")
    return clustering.assignment[i]


def load_network(path: str | Path) -> AdjacencyMatrix:
    with open(path) as fh:
        return AdjacencyMatrix.from_json(json.load(fh))


def load_clustering(path: str | Path) -> Clustering:
    with open(path) as fh:
        return Clustering.from_json(json.load(fh))
