from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
import torch

from src.numerics.tensor_core import DTYPE, Matrix, pairwise_sq_dists, softmax_rows

if TYPE_CHECKING:
    from src.model.network import CrossViewTopicModel

SIMPLEX_TOL = 1e-6


def gene_topic_matrix(gene_embeddings: Matrix, topic_embeddings: Matrix, tau: float) -> Matrix:
    """O[m, k] = softmax_k(-||g_m - t_k||^2 / tau); every row sums to one."""
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    return softmax_rows(-pairwise_sq_dists(gene_embeddings, topic_embeddings) / tau)


def extract_top_genes(gene_topic: np.ndarray, gene_names: Sequence[str], h: int) -> list[list[str]]:
    """Per topic, the ``h`` genes with the largest weight, descending; ties go to the lower gene index."""
    gene_topic = np.asarray(gene_topic, dtype=np.float64)
    n_genes = gene_topic.shape[0]
    if len(gene_names) != n_genes:
        raise ValueError(f"got {len(gene_names)} gene names for {n_genes} genes")
    if h < 1 or h > n_genes:
        raise ValueError(f"h must satisfy 1 <= h <= V, got h={h} V={n_genes}")
    topics: list[list[str]] = []
    for k in range(gene_topic.shape[1]):
        order = np.argsort(-gene_topic[:, k], kind="stable")[:h]
        topics.append([gene_names[m] for m in order])
    return topics


@dataclass(frozen=True)
class TopicOutputs:
    theta: np.ndarray
    gene_topic: np.ndarray
    top_genes: list[list[str]]
    gene_names: tuple[str, ...]

    @property
    def n_topics(self) -> int:
        return int(self.gene_topic.shape[1])

    def check_simplex(self, tol: float = SIMPLEX_TOL) -> None:
        for name, matrix in (("theta", self.theta), ("gene_topic", self.gene_topic)):
            if (matrix < 0).any():
                raise ValueError(f"{name} has negative entries")
            worst = float(np.abs(matrix.sum(axis=1) - 1.0).max(initial=0.0))
            if worst > tol:
                raise ValueError(f"{name} rows deviate from 1 by {worst:.2e}")


def infer_topics(
    model: CrossViewTopicModel,
    x: np.ndarray,
    gene_names: Sequence[str],
    h: int,
) -> TopicOutputs:
    """Inference pass with zeta = 0 over all cells."""
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            theta, _, _ = model.encode(torch.as_tensor(x, dtype=DTYPE))
            gene_topic = model.gene_topic()
    finally:
        model.train(was_training)
    gene_topic_np = gene_topic.numpy().copy()
    return TopicOutputs(
        theta=theta.numpy().copy(),
        gene_topic=gene_topic_np,
        top_genes=extract_top_genes(gene_topic_np, gene_names, h),
        gene_names=tuple(gene_names),
    )
