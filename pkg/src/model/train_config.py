from __future__ import annotations

from dataclasses import asdict, dataclass

from src.data.neighbors import DEFAULT_KNN_K
from src.model.losses import REG_REDUCTIONS
from src.numerics.ot_ecr import DEFAULT_EPSILON, DEFAULT_TOL

HIDDEN_UNITS = 200
LARGE_DATASET_CELLS = 10000
TRAIN_SINKHORN_MAX_ITER = 5000


@dataclass(frozen=True)
class TrainConfig:
    n_topics: int = 100
    embed_dim: int = 200
    epochs: int = 500
    batch_size: int | None = None
    lr: float = 2e-3
    alpha: float = 5.0
    lam: float = 20.0
    tau: float = 0.1
    epsilon: float = DEFAULT_EPSILON
    sinkhorn_tol: float = DEFAULT_TOL
    sinkhorn_max_iter: int = TRAIN_SINKHORN_MAX_ITER
    knn_k: int = DEFAULT_KNN_K
    temperature: float = 0.5
    use_cve: bool = True
    batch_entropy: bool = False
    reg_reduction: str = "mean"
    top_genes: int = 10
    seed: int = 7

    def validate(self, n_cells: int | None = None) -> None:
        for name in ("n_topics", "embed_dim", "epochs", "sinkhorn_max_iter", "knn_k", "top_genes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("lr", "tau", "epsilon", "sinkhorn_tol", "temperature"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("alpha", "lam"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.reg_reduction not in REG_REDUCTIONS:
            raise ValueError(f"reg_reduction must be one of {REG_REDUCTIONS}, got {self.reg_reduction!r}")
        if self.batch_size is not None:
            if self.batch_size < 1:
                raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
            if n_cells is not None and self.batch_size > n_cells:
                raise ValueError(f"batch_size={self.batch_size} exceeds n_cells={n_cells}")

    def resolve_batch_size(self, n_cells: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        default = 2048 if n_cells >= LARGE_DATASET_CELLS else 512
        return min(default, n_cells)

    def to_dict(self) -> dict[str, object]:
        return asdict(self)
