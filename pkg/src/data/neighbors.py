from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.spatial.distance import cdist

LOGGER = logging.getLogger(__name__)

DEFAULT_KNN_K = 15
_BLOCK_ROWS = 1024

View = Literal["x", "v"]


@dataclass(frozen=True)
class ViewNeighbors:
    """Mutual-kNN lists for one view; ``fallback[i]`` marks cells that kept plain kNN."""

    neighbors: tuple[np.ndarray, ...]
    fallback: np.ndarray
    k: int

    @property
    def n_cells(self) -> int:
        return len(self.neighbors)


@dataclass(frozen=True)
class NeighborIndex:
    x: ViewNeighbors
    v: ViewNeighbors | None
    k: int

    def view(self, name: View) -> ViewNeighbors:
        if name == "x":
            return self.x
        if name == "v":
            if self.v is None:
                raise ValueError("neighbor index has no external view")
            return self.v
        raise ValueError(f"unknown view {name!r}")


def knn_lists(points: np.ndarray, k: int) -> np.ndarray:
    """k nearest other points per row by Euclidean distance, ties broken by lower index."""
    n = points.shape[0]
    result = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(n, start + _BLOCK_ROWS)
        dists = cdist(points[start:stop], points, metric="sqeuclidean")
        dists[np.arange(stop - start), np.arange(start, stop)] = np.inf
        order = np.argsort(dists, axis=1, kind="stable")
        result[start:stop] = order[:, :k]
    return result


def build_mutual_knn(points: np.ndarray, k: int = DEFAULT_KNN_K) -> ViewNeighbors:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {points.shape}")
    n = points.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 points, got {n}")
    if k < 1 or k >= n:
        raise ValueError(f"k must satisfy 1 <= k < n, got k={k} n={n}")

    knn = knn_lists(points, k)
    members = [set(row.tolist()) for row in knn]
    neighbors: list[np.ndarray] = []
    fallback = np.zeros(n, dtype=bool)
    for i in range(n):
        mutual = [int(j) for j in knn[i] if i in members[j]]
        if not mutual:
            fallback[i] = True
            mutual = knn[i].tolist()
        neighbors.append(np.asarray(mutual, dtype=np.int64))
    if fallback.any():
        LOGGER.info("Mutual kNN fell back to plain kNN for %s of %s cells (k=%s)", int(fallback.sum()), n, k)
    return ViewNeighbors(neighbors=tuple(neighbors), fallback=fallback, k=k)


def build_neighbor_index(x: np.ndarray, v: np.ndarray | None, k: int = DEFAULT_KNN_K) -> NeighborIndex:
    return NeighborIndex(
        x=build_mutual_knn(x, k),
        v=None if v is None else build_mutual_knn(v, k),
        k=k,
    )


def sample_neighbor(index: NeighborIndex, view: View, i: int, rng: np.random.Generator) -> int:
    candidates = index.view(view).neighbors[i]
    return int(candidates[rng.integers(len(candidates))])


def sample_neighbors(index: NeighborIndex, view: View, cells: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return np.asarray([sample_neighbor(index, view, int(i), rng) for i in cells], dtype=np.int64)
