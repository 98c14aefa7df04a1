from src.data.dataset import Dataset, Pathway, PathwayDB
from src.data.neighbors import NeighborIndex, build_mutual_knn, build_neighbor_index, sample_neighbor
from src.data.preprocess import preprocess, preprocess_dataset
from src.data.synthetic import SynthConfig, SyntheticDataset, generate_synthetic

__all__ = [
    "Dataset",
    "NeighborIndex",
    "Pathway",
    "PathwayDB",
    "SynthConfig",
    "SyntheticDataset",
    "build_mutual_knn",
    "build_neighbor_index",
    "generate_synthetic",
    "preprocess",
    "preprocess_dataset",
    "sample_neighbor",
]
