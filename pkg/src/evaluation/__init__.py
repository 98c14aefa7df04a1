from src.evaluation.cluster_eval import ari, cluster_theta, nmi
from src.evaluation.enrichment import EnrichmentResult, benjamini_hochberg, gsea, ora
from src.evaluation.interpret_metrics import interpretation_purity, topic_coherence, topic_diversity
from src.evaluation.report import InterpretReport, MetricConfig, full_report

__all__ = [
    "EnrichmentResult",
    "InterpretReport",
    "MetricConfig",
    "ari",
    "benjamini_hochberg",
    "cluster_theta",
    "full_report",
    "gsea",
    "interpretation_purity",
    "nmi",
    "ora",
    "topic_coherence",
    "topic_diversity",
]
