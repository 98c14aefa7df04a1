from src.model.network import CrossViewTopicModel
from src.model.topics import TopicOutputs, extract_top_genes, gene_topic_matrix, infer_topics
from src.model.train_config import TrainConfig
from src.model.trainer import TrainResult, train

__all__ = [
    "CrossViewTopicModel",
    "TopicOutputs",
    "TrainConfig",
    "TrainResult",
    "extract_top_genes",
    "gene_topic_matrix",
    "infer_topics",
    "train",
]
