"""Topic coherence, diversity, interpretation purity and embedding similarity."""

from __future__ import annotations

import logging
from itertools import combinations
from typing import Sequence

import numpy as np

from src.data.dataset import PathwayDB

LOGGER = logging.getLogger(__name__)


def _incidence(genes: Sequence[str], db: PathwayDB) -> np.ndarray:
    """Boolean pathways x genes membership matrix for the given gene list."""
    matrix = np.zeros((len(db.pathways), len(genes)), dtype=bool)
    for row, pathway in enumerate(db.pathways):
        members = pathway.gene_set
        matrix[row] = [gene in members for gene in genes]
    return matrix


def npmi(p_i: float, p_j: float, p_ij: float) -> float:
    """Pair statistic log(p_ij / (p_i p_j)) / -log p_ij.

    Pairs that never co-occur (or involve an absent gene) score 0; a pair
    present in every pathway scores 1.
    """
    if p_ij <= 0.0 or p_i <= 0.0 or p_j <= 0.0:
        return 0.0
    if p_ij >= 1.0:
        return 1.0
    return float(np.log(p_ij / (p_i * p_j)) / -np.log(p_ij))


def topic_coherence_per_topic(top_genes: Sequence[Sequence[str]], db: PathwayDB) -> list[float]:
    if not db.pathways:
        raise ValueError("topic coherence needs a non-empty pathway database")
    n_pathways = len(db.pathways)
    scores: list[float] = []
    for genes in top_genes:
        if len(genes) < 2:
            raise ValueError(f"topic coherence needs h >= 2, got {len(genes)}")
        incidence = _incidence(genes, db)
        marginal = incidence.sum(axis=0) / n_pathways
        joint = (incidence.T.astype(np.int64) @ incidence.astype(np.int64)) / n_pathways
        pairs = [npmi(marginal[i], marginal[j], joint[i, j]) for i, j in combinations(range(len(genes)), 2)]
        scores.append(float(np.mean(pairs)))
    return scores


def topic_coherence(top_genes: Sequence[Sequence[str]], db: PathwayDB) -> float:
    return float(np.mean(topic_coherence_per_topic(top_genes, db)))


def topic_diversity(top_genes: Sequence[Sequence[str]]) -> float:
    pooled = [gene for genes in top_genes for gene in genes]
    if not pooled:
        raise ValueError("topic diversity needs at least one topic with genes")
    return len(set(pooled)) / len(pooled)


def argmax_rows(theta: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest topic index on ties
    return np.argmax(np.asarray(theta), axis=1).astype(np.int64)


def interpretation_purity(theta: np.ndarray, labels: np.ndarray) -> float:
    theta = np.asarray(theta)
    labels = np.asarray(labels)
    if theta.shape[0] != labels.shape[0]:
        raise ValueError(f"theta has {theta.shape[0]} rows, labels has {labels.shape[0]}")
    if theta.shape[0] == 0:
        raise ValueError("interpretation purity needs at least one cell")
    assigned = argmax_rows(theta)
    _, label_codes = np.unique(labels, return_inverse=True)
    counts = np.zeros((theta.shape[1], int(label_codes.max()) + 1), dtype=np.int64)
    np.add.at(counts, (assigned, label_codes), 1)
    return float(counts.max(axis=1).sum() / theta.shape[0])


def topic_gene_similarity(
    topic_embeddings: np.ndarray,
    gene_embeddings: np.ndarray,
    gene_names: Sequence[str],
    top_genes: Sequence[Sequence[str]],
) -> list[float]:
    """Mean cosine similarity between each topic embedding and the embeddings of its top genes."""
    index = {name: m for m, name in enumerate(gene_names)}
    topics = np.asarray(topic_embeddings, dtype=np.float64)
    genes = np.asarray(gene_embeddings, dtype=np.float64)
    if topics.shape[0] != len(top_genes):
        raise ValueError(f"{topics.shape[0]} topic embeddings for {len(top_genes)} top-gene lists")
    topic_norm = topics / np.maximum(np.linalg.norm(topics, axis=1, keepdims=True), 1e-12)
    gene_norm = genes / np.maximum(np.linalg.norm(genes, axis=1, keepdims=True), 1e-12)
    scores: list[float] = []
    for k, names in enumerate(top_genes):
        missing = [name for name in names if name not in index]
        if missing:
            raise ValueError(f"topic {k} lists unknown gene {missing[0]!r}")
        rows = [index[name] for name in names]
        scores.append(float((gene_norm[rows] @ topic_norm[k]).mean()))
    return scores
