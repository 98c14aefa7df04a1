from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from src.data.dataset import Dataset

LOGGER = logging.getLogger(__name__)

DEFAULT_N_HVG = 5000


@dataclass(frozen=True)
class HvgSelection:
    matrix: np.ndarray
    gene_names: tuple[str, ...]
    indices: np.ndarray
    variances: np.ndarray


def select_hvg_indices(log_matrix: np.ndarray, n_hvg: int) -> tuple[np.ndarray, np.ndarray]:
    """Column indices of the ``n_hvg`` highest-variance genes, descending, ties by lower index."""
    variances = log_matrix.var(axis=0)
    columns = np.arange(log_matrix.shape[1])
    order = np.lexsort((columns, -variances))
    return order[:n_hvg], variances


def preprocess(expression: np.ndarray, gene_names: tuple[str, ...], n_hvg: int) -> HvgSelection:
    n_genes = expression.shape[1]
    if n_hvg < 1:
        raise ValueError(f"n_hvg must be >= 1, got {n_hvg}")
    if n_hvg > n_genes:
        raise ValueError(f"n_hvg={n_hvg} exceeds the {n_genes} available genes")
    log_matrix = np.log1p(expression)
    indices, variances = select_hvg_indices(log_matrix, n_hvg)
    selected_names = tuple(gene_names[i] for i in indices)
    LOGGER.info("Selected %s of %s genes by log1p variance", n_hvg, n_genes)
    return HvgSelection(
        matrix=log_matrix[:, indices],
        gene_names=selected_names,
        indices=indices,
        variances=variances[indices],
    )


def preprocess_dataset(dataset: Dataset, n_hvg: int) -> Dataset:
    n_hvg = min(n_hvg, dataset.n_genes)
    selection = preprocess(dataset.expression, dataset.gene_names, n_hvg)
    return Dataset(
        expression=selection.matrix,
        gene_names=selection.gene_names,
        cell_ids=dataset.cell_ids,
        external=dataset.external,
        labels=dataset.labels,
        label_names=dataset.label_names,
    )
