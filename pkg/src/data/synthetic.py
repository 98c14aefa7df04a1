"""Planted-topic datasets with a long-tailed gene popularity profile.

Each topic owns a disjoint block of signature genes boosted over a Zipf
background; cells are assigned topics round-robin, draw a library size, and
sample counts from their topic's gene distribution. The external view is a
noisy random projection of the planted topic.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from src.data.dataset import Dataset, Pathway, PathwayDB

LIBRARY_SIZE_RANGE = (800, 1200)


@dataclass(frozen=True)
class SynthConfig:
    n_cells: int = 500
    n_genes: int = 300
    n_topics: int = 5
    zipf_exponent: float = 1.2
    noise_level: float = 0.1
    view_dim: int = 32
    seed: int = 7
    boost: float = 10.0

    def validate(self) -> None:
        for name in ("n_cells", "n_genes", "n_topics", "view_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_topics > self.n_cells:
            raise ValueError(f"n_topics={self.n_topics} exceeds n_cells={self.n_cells}")
        if self.n_topics > self.n_genes:
            raise ValueError(f"n_topics={self.n_topics} exceeds n_genes={self.n_genes}")
        if self.zipf_exponent < 0:
            raise ValueError(f"zipf_exponent must be >= 0, got {self.zipf_exponent}")
        if not 0.0 <= self.noise_level <= 1.0:
            raise ValueError(f"noise_level must be in [0, 1], got {self.noise_level}")
        if self.boost <= 0:
            raise ValueError(f"boost must be > 0, got {self.boost}")

    def to_dict(self) -> dict[str, float | int]:
        return asdict(self)


@dataclass(frozen=True)
class SyntheticDataset:
    dataset: Dataset
    topic_gene: np.ndarray
    planted_labels: np.ndarray
    signature_blocks: tuple[tuple[str, ...], ...]
    config: SynthConfig

    def signature_pathways(self) -> PathwayDB:
        return PathwayDB(
            pathways=tuple(
                Pathway(name=f"PLANTED_TOPIC_{k}", genes=genes) for k, genes in enumerate(self.signature_blocks) if genes
            )
        )


def gene_names_for(n_genes: int) -> tuple[str, ...]:
    width = max(4, len(str(n_genes)))
    return tuple(f"G{j:0{width}d}" for j in range(n_genes))


def cell_ids_for(n_cells: int) -> tuple[str, ...]:
    width = max(4, len(str(n_cells)))
    return tuple(f"cell_{i:0{width}d}" for i in range(n_cells))


def planted_topic_gene(cfg: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    n_genes, n_topics = cfg.n_genes, cfg.n_topics
    ranks = rng.permutation(n_genes) + 1
    base = ranks.astype(np.float64) ** (-cfg.zipf_exponent)
    block = n_genes // n_topics
    topic_gene = np.tile(base, (n_topics, 1))
    for k in range(n_topics):
        topic_gene[k, k * block : (k + 1) * block] *= cfg.boost
    return topic_gene / topic_gene.sum(axis=1, keepdims=True)


def generate_synthetic(cfg: SynthConfig) -> SyntheticDataset:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    topic_gene = planted_topic_gene(cfg, rng)

    labels = np.arange(cfg.n_cells) % cfg.n_topics
    low, high = LIBRARY_SIZE_RANGE
    library_sizes = rng.integers(low, high + 1, size=cfg.n_cells)
    counts = np.empty((cfg.n_cells, cfg.n_genes), dtype=np.float64)
    for i in range(cfg.n_cells):
        counts[i] = rng.multinomial(library_sizes[i], topic_gene[labels[i]])

    projection = rng.normal(size=(cfg.n_topics, cfg.view_dim))
    one_hot = np.eye(cfg.n_topics)[labels]
    external = one_hot @ projection
    if cfg.noise_level > 0:
        external = external + rng.normal(scale=cfg.noise_level, size=external.shape)

    gene_names = gene_names_for(cfg.n_genes)
    block = cfg.n_genes // cfg.n_topics
    blocks = tuple(tuple(gene_names[k * block : (k + 1) * block]) for k in range(cfg.n_topics))
    dataset = Dataset(
        expression=counts,
        gene_names=gene_names,
        cell_ids=cell_ids_for(cfg.n_cells),
        external=external,
        labels=labels.astype(np.int64),
        label_names=tuple(f"topic_{k}" for k in range(cfg.n_topics)),
    )
    return SyntheticDataset(
        dataset=dataset,
        topic_gene=topic_gene,
        planted_labels=labels.astype(np.int64),
        signature_blocks=blocks,
        config=cfg,
    )
