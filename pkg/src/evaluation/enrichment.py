"""Pathway enrichment of topics: over-representation (ORA) and GSEA, with BH correction."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import pandas as pd
from scipy.stats import false_discovery_control, hypergeom

from src.core.errors import DataError
from src.data.dataset import PathwayDB

LOGGER = logging.getLogger(__name__)

DEFAULT_N_PERM = 1000
DEFAULT_ORA_Q = 0.05
DEFAULT_GSEA_Q = 0.01
DEFAULT_GSEA_WEIGHT = 1.0
_PERM_BLOCK = 256

Method = Literal["ora", "gsea"]

RECORD_COLUMNS = ("topic", "pathway", "p_value", "q_value", "statistic", "significant")


@dataclass(frozen=True)
class EnrichmentRecord:
    topic: int
    pathway: str
    p_value: float
    q_value: float
    statistic: float
    significant: bool


@dataclass(frozen=True)
class EnrichmentResult:
    """All tested (topic, pathway) pairs; ``statistic`` is fold enrichment for ORA and ES for GSEA."""

    method: Method
    records: tuple[EnrichmentRecord, ...]
    threshold: float

    @property
    def significant_pathways(self) -> list[str]:
        return [r.pathway for r in self.records if r.significant]

    @property
    def n_unique(self) -> int:
        return len(set(self.significant_pathways))

    @property
    def uniqueness(self) -> float:
        hits = self.significant_pathways
        if not hits:
            return 1.0
        return len(set(hits)) / len(hits)

    @property
    def quality(self) -> float:
        return self.n_unique * self.uniqueness

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (r.topic, r.pathway, r.p_value, r.q_value, r.statistic, r.significant) for r in self.records
        ]
        return pd.DataFrame(rows, columns=list(RECORD_COLUMNS))


def benjamini_hochberg(pvalues: Sequence[float] | np.ndarray) -> np.ndarray:
    """Step-up BH q-values in input order; q_(i) = min_{j >= i} m p_(j) / j, clipped to 1."""
    p = np.asarray(pvalues, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("benjamini_hochberg expects a 1-D sequence")
    if p.size == 0:
        return p.copy()
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise ValueError("p-values must lie in [0, 1]")
    return np.asarray(false_discovery_control(p, method="bh"), dtype=np.float64)


def hypergeom_upper_tail(observed: int, population: int, successes: int, draws: int) -> float:
    """P[X >= observed] for X ~ Hypergeometric(population, successes, draws)."""
    if observed <= 0:
        return 1.0
    return float(min(1.0, max(0.0, hypergeom.sf(observed - 1, population, successes, draws))))


def _finish(method: Method, raw: list[tuple[int, str, float, float]], threshold: float) -> EnrichmentResult:
    qvalues = benjamini_hochberg([p for _, _, p, _ in raw])
    records = tuple(
        EnrichmentRecord(
            topic=topic,
            pathway=name,
            p_value=p,
            q_value=float(q),
            statistic=stat,
            significant=bool(q < threshold),
        )
        for (topic, name, p, stat), q in zip(raw, qvalues)
    )
    return EnrichmentResult(method=method, records=records, threshold=threshold)


def ora(
    top_genes: Sequence[Sequence[str]],
    db: PathwayDB,
    universe: Sequence[str],
    q_threshold: float = DEFAULT_ORA_Q,
) -> EnrichmentResult:
    universe_set = frozenset(universe)
    population = len(universe_set)
    tested = [(p.name, len(p.gene_set & universe_set), p.gene_set) for p in db.pathways]
    usable = [entry for entry in tested if entry[1] > 0]
    if not usable:
        raise DataError("no pathway shares a gene with the universe")
    if len(usable) < len(tested):
        LOGGER.warning("ORA skipped %s pathways with no gene in the universe", len(tested) - len(usable))

    raw: list[tuple[int, str, float, float]] = []
    for topic, genes in enumerate(top_genes):
        top = frozenset(genes)
        outside = top - universe_set
        if outside:
            raise DataError(f"topic {topic} has genes outside the universe, e.g. {sorted(outside)[0]!r}")
        draws = len(top)
        for name, successes, members in usable:
            overlap = len(top & members)
            p = hypergeom_upper_tail(overlap, population, successes, draws)
            fold = (overlap / draws) / (successes / population) if draws else 0.0
            raw.append((topic, name, p, fold))
    return _finish("ora", raw, q_threshold)


def running_sum(tags: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Running enrichment for boolean ``tags`` (rows = gene sets or permutations) over one ranking."""
    tags = np.atleast_2d(tags)
    hit_weight = np.where(tags, weights, 0.0)
    hit_norm = hit_weight.sum(axis=1, keepdims=True)
    hit = np.divide(
        np.cumsum(hit_weight, axis=1),
        hit_norm,
        out=np.zeros_like(hit_weight),
        where=hit_norm > 0,
    )
    n_miss = (~tags).sum(axis=1, keepdims=True)
    miss = np.cumsum(~tags, axis=1) / n_miss
    return hit - miss


def enrichment_scores(tags: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Signed extremum of each running sum; the first position wins ties in magnitude."""
    deviation = running_sum(tags, weights)
    idx = np.argmax(np.abs(deviation), axis=1)
    return deviation[np.arange(deviation.shape[0]), idx]


def gsea(
    gene_topic: np.ndarray,
    gene_names: Sequence[str],
    db: PathwayDB,
    n_perm: int = DEFAULT_N_PERM,
    q_threshold: float = DEFAULT_GSEA_Q,
    seed: int = 0,
    weight: float = DEFAULT_GSEA_WEIGHT,
) -> EnrichmentResult:
    """Per topic, rank every gene by its weight and score each pathway with a permutation null.

    Each (topic, pathway) pair draws from its own generator seeded by
    ``[seed, topic, pathway_index]``, so results do not depend on evaluation order.
    """
    if n_perm < 1:
        raise ValueError(f"n_perm must be >= 1, got {n_perm}")
    if weight < 0:
        raise ValueError(f"weight must be >= 0, got {weight}")
    gene_topic = np.asarray(gene_topic, dtype=np.float64)
    n_genes = gene_topic.shape[0]
    if len(gene_names) != n_genes:
        raise ValueError(f"got {len(gene_names)} gene names for {n_genes} genes")
    names = np.asarray(gene_names, dtype=object)

    raw: list[tuple[int, str, float, float]] = []
    skipped: set[str] = set()
    for topic in range(gene_topic.shape[1]):
        order = np.argsort(-gene_topic[:, topic], kind="stable")
        weights = np.abs(gene_topic[order, topic]) ** weight
        ranked = names[order]
        for index, pathway in enumerate(db.pathways):
            tags = np.isin(ranked, list(pathway.gene_set))
            n_hits = int(tags.sum())
            if n_hits == 0:
                raise DataError(f"pathway {pathway.name!r} has no gene in the ranking")
            if n_hits == n_genes:
                skipped.add(pathway.name)
                continue
            observed = float(enrichment_scores(tags, weights)[0])
            rng = np.random.default_rng([seed, topic, index])
            exceed = 0
            for start in range(0, n_perm, _PERM_BLOCK):
                block = min(_PERM_BLOCK, n_perm - start)
                shuffled = rng.permuted(np.tile(tags, (block, 1)), axis=1)
                null = enrichment_scores(shuffled, weights)
                exceed += int((np.abs(null) >= abs(observed)).sum())
            p = (1 + exceed) / (1 + n_perm)
            raw.append((topic, pathway.name, p, observed))
    for name in sorted(skipped):
        LOGGER.warning("GSEA skipped pathway %s: it covers every ranked gene", name)
    return _finish("gsea", raw, q_threshold)
