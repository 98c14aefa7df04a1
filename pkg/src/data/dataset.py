from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from src.core.errors import DataError


@dataclass(frozen=True)
class Dataset:
    """Cells x genes expression (the internal view) plus the optional external view."""

    expression: np.ndarray
    gene_names: tuple[str, ...]
    cell_ids: tuple[str, ...]
    external: np.ndarray | None = None
    labels: np.ndarray | None = None
    label_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        expression = self.expression
        if expression.ndim != 2:
            raise DataError(f"expression must be 2-D, got shape {expression.shape}")
        n_cells, n_genes = expression.shape
        if len(self.gene_names) != n_genes:
            raise DataError(f"{len(self.gene_names)} gene names for {n_genes} columns")
        if len(self.cell_ids) != n_cells:
            raise DataError(f"{len(self.cell_ids)} cell ids for {n_cells} rows")
        if not np.isfinite(expression).all():
            raise DataError("expression contains NaN or infinite values")
        if (expression < 0).any():
            raise DataError("expression contains negative values")
        duplicates = _duplicates(self.gene_names)
        if duplicates:
            raise DataError(f"duplicate gene names: {', '.join(duplicates[:5])}")
        if self.external is not None and self.external.shape[0] != n_cells:
            raise DataError(f"external view has {self.external.shape[0]} rows, expression has {n_cells}")
        if self.labels is not None and self.labels.shape[0] != n_cells:
            raise DataError(f"{self.labels.shape[0]} labels for {n_cells} cells")

    @property
    def n_cells(self) -> int:
        return int(self.expression.shape[0])

    @property
    def n_genes(self) -> int:
        return int(self.expression.shape[1])

    @property
    def view_dim(self) -> int:
        return 0 if self.external is None else int(self.external.shape[1])


@dataclass(frozen=True)
class Pathway:
    name: str
    genes: tuple[str, ...]

    @property
    def gene_set(self) -> frozenset[str]:
        return frozenset(self.genes)


@dataclass(frozen=True)
class PathwayDB:
    pathways: tuple[Pathway, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        duplicates = _duplicates([p.name for p in self.pathways])
        if duplicates:
            raise DataError(f"duplicate pathway names: {', '.join(duplicates[:5])}")
        for pathway in self.pathways:
            if not pathway.genes:
                raise DataError(f"pathway {pathway.name} has no genes")

    def __len__(self) -> int:
        return len(self.pathways)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.pathways]

    def restrict_to(self, vocabulary: Iterable[str]) -> "PathwayDB":
        """Keep each pathway's genes that are in ``vocabulary``; drop pathways left empty."""
        allowed = set(vocabulary)
        kept: list[Pathway] = []
        for pathway in self.pathways:
            genes = tuple(g for g in pathway.genes if g in allowed)
            if genes:
                kept.append(Pathway(name=pathway.name, genes=genes))
        return PathwayDB(pathways=tuple(kept))


def _duplicates(values: Iterable[str]) -> list[str]:
    seen: set[str] = set()
    duplicates: list[str] = []
    for value in values:
        if value in seen and value not in duplicates:
            duplicates.append(value)
        seen.add(value)
    return duplicates
