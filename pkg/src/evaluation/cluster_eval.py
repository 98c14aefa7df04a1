"""Agreement between a clustering and reference labels, and clustering of theta."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.sparse as sp
from sklearn.cluster import KMeans
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from src.evaluation.interpret_metrics import argmax_rows

ClusterMode = Literal["argmax", "kmeans"]
KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class ContingencyTable:
    """Rows are predicted clusters, columns true classes."""

    counts: sp.csr_matrix

    @classmethod
    def from_labels(cls, pred: np.ndarray, truth: np.ndarray) -> ContingencyTable:
        pred = np.asarray(pred)
        truth = np.asarray(truth)
        if pred.shape != truth.shape or pred.ndim != 1:
            raise ValueError(f"label arrays must be 1-D of equal length, got {pred.shape} and {truth.shape}")
        counts = contingency_matrix(pred, truth, sparse=True).astype(np.int64)
        return cls(counts=sp.csr_matrix(counts))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def row_sums(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=1)).ravel()

    @property
    def col_sums(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=0)).ravel()


def _check_lengths(pred: np.ndarray, truth: np.ndarray) -> None:
    if len(pred) != len(truth):
        raise ValueError(f"length mismatch: {len(pred)} predictions, {len(truth)} labels")
    if len(pred) < 2:
        raise ValueError("need at least 2 cells")


def ari(pred: np.ndarray, truth: np.ndarray) -> float:
    """Adjusted Rand index; 1.0 when both partitions are all-singletons or a single cluster."""
    _check_lengths(pred, truth)
    return float(adjusted_rand_score(np.asarray(truth), np.asarray(pred)))


def nmi(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mutual information over the geometric mean of the two entropies.

    Two single-cluster partitions score 1; a single cluster against any split scores 0.
    """
    _check_lengths(pred, truth)
    score = normalized_mutual_info_score(np.asarray(truth), np.asarray(pred), average_method="geometric")
    return float(min(1.0, max(0.0, score)))


def cluster_theta(theta: np.ndarray, mode: ClusterMode = "argmax", k: int | None = None, seed: int = 0) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if mode == "argmax":
        return argmax_rows(theta)
    if mode == "kmeans":
        if k is None or k < 1:
            raise ValueError(f"kmeans needs k >= 1, got {k}")
        if k > theta.shape[0]:
            raise ValueError(f"k={k} exceeds the {theta.shape[0]} cells")
        model = KMeans(
            n_clusters=k,
            init="k-means++",
            n_init=1,
            max_iter=KMEANS_MAX_ITER,
            tol=0.0,
            algorithm="lloyd",
            random_state=seed,
        )
        return model.fit_predict(theta).astype(np.int64)
    raise ValueError(f"unknown clustering mode {mode!r}")
