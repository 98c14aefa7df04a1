from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from src.data.dataset import PathwayDB
from src.evaluation.cluster_eval import ari, cluster_theta, nmi
from src.evaluation.enrichment import (
    DEFAULT_GSEA_Q,
    DEFAULT_GSEA_WEIGHT,
    DEFAULT_N_PERM,
    DEFAULT_ORA_Q,
    EnrichmentResult,
    gsea,
    ora,
)
from src.evaluation.interpret_metrics import (
    interpretation_purity,
    topic_coherence_per_topic,
    topic_diversity,
    topic_gene_similarity,
)
from src.model.topics import TopicOutputs

LOGGER = logging.getLogger(__name__)

METRIC_KEYS = ("TC", "TD", "TQ", "IP", "ORA_N", "ORA_U", "ORA_Q", "GSEA_N", "GSEA_U", "GSEA_Q")


@dataclass(frozen=True)
class MetricConfig:
    top_genes: int = 10
    n_perm: int = DEFAULT_N_PERM
    ora_q: float = DEFAULT_ORA_Q
    gsea_q: float = DEFAULT_GSEA_Q
    gsea_weight: float = DEFAULT_GSEA_WEIGHT
    seed: int = 7

    def validate(self) -> None:
        if self.top_genes < 2:
            raise ValueError(f"top_genes must be >= 2, got {self.top_genes}")
        if self.n_perm < 1:
            raise ValueError(f"n_perm must be >= 1, got {self.n_perm}")
        for name in ("ora_q", "gsea_q"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {value}")
        if self.gsea_weight < 0:
            raise ValueError(f"gsea_weight must be >= 0, got {self.gsea_weight}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class InterpretReport:
    tc: float
    td: float
    ip: float
    ora_result: EnrichmentResult
    gsea_result: EnrichmentResult
    coherence_per_topic: list[float]
    config: MetricConfig
    similarity_per_topic: list[float] = field(default_factory=list)

    @property
    def tq(self) -> float:
        return self.tc * self.td

    @property
    def negative_tc(self) -> bool:
        return self.tc < 0

    def metrics(self) -> dict[str, float]:
        values = (
            self.tc,
            self.td,
            self.tq,
            self.ip,
            float(self.ora_result.n_unique),
            self.ora_result.uniqueness,
            self.ora_result.quality,
            float(self.gsea_result.n_unique),
            self.gsea_result.uniqueness,
            self.gsea_result.quality,
        )
        return dict(zip(METRIC_KEYS, values))

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "metrics": self.metrics(),
            "flags": {"negative_tc": self.negative_tc},
            "config": self.config.to_dict(),
            "per_topic": {"coherence": list(self.coherence_per_topic)},
        }
        if self.similarity_per_topic:
            payload["per_topic"]["topic_gene_similarity"] = list(self.similarity_per_topic)
            payload["topic_gene_similarity"] = float(np.mean(self.similarity_per_topic))
        return payload


def full_report(
    outputs: TopicOutputs,
    labels: np.ndarray,
    db: PathwayDB,
    config: MetricConfig,
    universe: Sequence[str] | None = None,
    embeddings: tuple[np.ndarray, np.ndarray] | None = None,
) -> InterpretReport:
    """All ten interpretability scalars; ``embeddings`` is (topic, gene) and adds the similarity detail."""
    config.validate()
    top_genes = [genes[: config.top_genes] for genes in outputs.top_genes]
    if any(len(genes) < config.top_genes for genes in top_genes):
        raise ValueError(f"every topic needs at least {config.top_genes} top genes")
    vocabulary = list(outputs.gene_names) if universe is None else list(universe)

    coherence = topic_coherence_per_topic(top_genes, db)
    tc = float(np.mean(coherence))
    td = topic_diversity(top_genes)
    ip = interpretation_purity(outputs.theta, labels)
    ora_result = ora(top_genes, db, vocabulary, q_threshold=config.ora_q)
    gsea_result = gsea(
        outputs.gene_topic,
        outputs.gene_names,
        db,
        n_perm=config.n_perm,
        q_threshold=config.gsea_q,
        seed=config.seed,
        weight=config.gsea_weight,
    )
    similarity: list[float] = []
    if embeddings is not None:
        similarity = topic_gene_similarity(embeddings[0], embeddings[1], outputs.gene_names, top_genes)

    report = InterpretReport(
        tc=tc,
        td=td,
        ip=ip,
        ora_result=ora_result,
        gsea_result=gsea_result,
        coherence_per_topic=coherence,
        config=config,
        similarity_per_topic=similarity,
    )
    if report.negative_tc:
        LOGGER.warning("Mean topic coherence is negative (TC=%.4f)", tc)
    return report


def clustering_report(theta: np.ndarray, labels: np.ndarray, seed: int, kmeans_k: int | None = None) -> dict[str, Any]:
    k = kmeans_k if kmeans_k is not None else int(np.unique(labels).shape[0])
    argmax_pred = cluster_theta(theta, "argmax")
    kmeans_pred = cluster_theta(theta, "kmeans", k=k, seed=seed)
    return {
        "argmax": {"ARI": ari(argmax_pred, labels), "NMI": nmi(argmax_pred, labels)},
        "kmeans": {"ARI": ari(kmeans_pred, labels), "NMI": nmi(kmeans_pred, labels), "k": k},
        "seed": seed,
    }
