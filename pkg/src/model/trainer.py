from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import torch

from src.core.errors import NumericalError
from src.data.dataset import Dataset
from src.data.neighbors import NeighborIndex, build_neighbor_index, sample_neighbors
from src.model.losses import loss_con, loss_nei, loss_re, loss_reg
from src.model.network import CrossViewTopicModel
from src.model.topics import TopicOutputs, infer_topics
from src.model.train_config import TrainConfig
from src.numerics.ot_ecr import ecr_loss
from src.numerics.tensor_core import DTYPE

LOGGER = logging.getLogger(__name__)

RMSPROP_DECAY = 0.99
RMSPROP_EPS = 1e-8

LOSS_LOG_COLUMNS = (
    "epoch",
    "L_RE",
    "L_CON",
    "L_NEI",
    "L_REG",
    "L_ECR",
    "total",
    "sinkhorn_iters",
    "sinkhorn_violation",
)

StepCallback = Callable[[int, torch.Tensor, torch.Tensor], None]


@dataclass(frozen=True)
class StepLosses:
    re: torch.Tensor
    con: torch.Tensor
    nei: torch.Tensor
    reg: torch.Tensor
    ecr: torch.Tensor
    alpha: float
    lam: float
    sinkhorn_iters: int = 0
    sinkhorn_violation: float = 0.0

    @property
    def total(self) -> torch.Tensor:
        return self.re + self.con + self.nei - self.alpha * self.reg + self.lam * self.ecr

    def terms(self) -> dict[str, torch.Tensor]:
        return {"L_RE": self.re, "L_CON": self.con, "L_NEI": self.nei, "L_REG": self.reg, "L_ECR": self.ecr}

    def check_finite(self) -> None:
        for name, value in self.terms().items():
            if not bool(torch.isfinite(value)):
                raise NumericalError(f"loss became {float(value)}", term=name)


@dataclass(frozen=True)
class EpochLoss:
    epoch: int
    re: float
    con: float
    nei: float
    reg: float
    ecr: float
    total: float
    sinkhorn_iters: int
    sinkhorn_violation: float

    def as_row(self) -> dict[str, float | int]:
        values = (
            self.epoch,
            self.re,
            self.con,
            self.nei,
            self.reg,
            self.ecr,
            self.total,
            self.sinkhorn_iters,
            self.sinkhorn_violation,
        )
        return dict(zip(LOSS_LOG_COLUMNS, values))


@dataclass
class TrainResult:
    model: CrossViewTopicModel
    outputs: TopicOutputs
    config: TrainConfig
    loss_log: list[EpochLoss] = field(default_factory=list)


@dataclass(frozen=True)
class StepBatch:
    """Rows of one mini-batch and of the sampled neighbors in each view."""

    x: torch.Tensor
    v: torch.Tensor | None = None
    x_nei: torch.Tensor | None = None
    v_nei: torch.Tensor | None = None


def build_model(dataset: Dataset, config: TrainConfig) -> CrossViewTopicModel:
    torch.manual_seed(config.seed)
    view_dim = dataset.view_dim if config.use_cve else 0
    return CrossViewTopicModel(
        n_genes=dataset.n_genes,
        view_dim=view_dim,
        n_topics=config.n_topics,
        embed_dim=config.embed_dim,
        tau=config.tau,
    )


def compute_step_losses(
    model: CrossViewTopicModel,
    batch: StepBatch,
    config: TrainConfig,
    generator: torch.Generator | None = None,
) -> tuple[StepLosses, torch.Tensor, torch.Tensor]:
    """One forward pass; returns the loss terms with the batch theta and O used to compute them."""
    theta, mu, logvar = model.encode(batch.x, generator=generator)
    gene_topic = model.gene_topic()
    zero = torch.zeros((), dtype=DTYPE)
    re = loss_re(theta, gene_topic, batch.x, mu, logvar, background=model.gene_background)

    con = nei = reg = zero
    if config.use_cve:
        if batch.v is None or batch.x_nei is None or batch.v_nei is None:
            raise ValueError("cross-view losses need the external view and sampled neighbors")
        phi = model.encode_external(batch.v)
        theta_nei, _, _ = model.encode(batch.x_nei, generator=generator)
        phi_nei = model.encode_external(batch.v_nei)
        con = loss_con(theta, phi)
        nei = loss_nei(theta, phi, theta_nei, phi_nei, temperature=config.temperature)
        reg = loss_reg(theta, phi, batch_entropy=config.batch_entropy, reduction=config.reg_reduction)

    ecr = zero
    iterations = 0
    violation = 0.0
    if config.lam > 0:
        result = ecr_loss(
            model.gene_embeddings,
            model.topic_embeddings,
            epsilon=config.epsilon,
            max_iter=config.sinkhorn_max_iter,
            tol=config.sinkhorn_tol,
        )
        ecr = result.loss
        iterations = result.plan.iterations
        violation = result.plan.marginal_violation

    losses = StepLosses(
        re=re,
        con=con,
        nei=nei,
        reg=reg,
        ecr=ecr,
        alpha=config.alpha,
        lam=config.lam,
        sinkhorn_iters=iterations,
        sinkhorn_violation=violation,
    )
    return losses, theta, gene_topic


def train(
    dataset: Dataset,
    config: TrainConfig,
    neighbors: NeighborIndex | None = None,
    on_step: StepCallback | None = None,
) -> TrainResult:
    """Mini-batch RMSprop over L_RE + L_CON + L_NEI - alpha * L_REG + lambda * L_ECR.

    Neighbor lists are built once up front. ``on_step`` sees the global step
    number, the batch theta and the gene-topic matrix after every update's
    forward pass.
    """
    config.validate(dataset.n_cells)
    if config.use_cve and dataset.external is None:
        raise ValueError("training with cross-view losses needs an external embedding")
    if config.lam > 0 and dataset.n_genes < config.n_topics:
        raise ValueError(f"need at least as many genes as topics, got V={dataset.n_genes} K={config.n_topics}")
    if config.top_genes > dataset.n_genes:
        raise ValueError(f"top_genes={config.top_genes} exceeds the {dataset.n_genes} genes")

    batch_size = config.resolve_batch_size(dataset.n_cells)
    model = build_model(dataset, config)
    model.train()
    optimizer = torch.optim.RMSprop(model.parameters(), lr=config.lr, alpha=RMSPROP_DECAY, eps=RMSPROP_EPS)
    rng = np.random.default_rng(config.seed)
    generator = torch.Generator().manual_seed(config.seed)

    x_all = torch.as_tensor(dataset.expression, dtype=DTYPE)
    model.set_background(x_all)
    v_all = None
    if config.use_cve and dataset.external is not None:
        v_all = torch.as_tensor(dataset.external, dtype=DTYPE)
        if neighbors is None:
            neighbors = build_neighbor_index(dataset.expression, dataset.external, config.knn_k)

    LOGGER.info(
        "Training K=%s E=%s on %s cells x %s genes, batch=%s epochs=%s cve=%s lambda=%s",
        config.n_topics,
        config.embed_dim,
        dataset.n_cells,
        dataset.n_genes,
        batch_size,
        config.epochs,
        config.use_cve,
        config.lam,
    )

    loss_log: list[EpochLoss] = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(dataset.n_cells)
        sums = np.zeros(6)
        max_iters = 0
        max_violation = 0.0
        n_batches = 0
        for start in range(0, dataset.n_cells, batch_size):
            cells = order[start : start + batch_size]
            rows = torch.from_numpy(cells)
            batch = StepBatch(x=x_all[rows])
            if v_all is not None and neighbors is not None:
                x_nei_ids = sample_neighbors(neighbors, "x", cells, rng)
                v_nei_ids = sample_neighbors(neighbors, "v", cells, rng)
                batch = StepBatch(
                    x=x_all[rows],
                    v=v_all[rows],
                    x_nei=x_all[torch.from_numpy(x_nei_ids)],
                    v_nei=v_all[torch.from_numpy(v_nei_ids)],
                )

            optimizer.zero_grad()
            losses, theta, gene_topic = compute_step_losses(model, batch, config, generator=generator)
            losses.check_finite()
            total = losses.total
            if not bool(torch.isfinite(total)):
                raise NumericalError(f"loss became {float(total)}", term="total")
            total.backward()
            optimizer.step()

            step += 1
            if on_step is not None:
                on_step(step, theta.detach(), gene_topic.detach())
            sums += [float(t) for t in (losses.re, losses.con, losses.nei, losses.reg, losses.ecr, total)]
            max_iters = max(max_iters, losses.sinkhorn_iters)
            max_violation = max(max_violation, losses.sinkhorn_violation)
            n_batches += 1

        means = sums / n_batches
        record = EpochLoss(
            epoch=epoch,
            re=float(means[0]),
            con=float(means[1]),
            nei=float(means[2]),
            reg=float(means[3]),
            ecr=float(means[4]),
            total=float(means[5]),
            sinkhorn_iters=max_iters,
            sinkhorn_violation=max_violation,
        )
        loss_log.append(record)
        LOGGER.info("epoch=%s total=%.6f ecr=%.6f sinkhorn_iters=%s", epoch, record.total, record.ecr, max_iters)

    outputs = infer_topics(model, dataset.expression, dataset.gene_names, config.top_genes)
    outputs.check_simplex()
    if loss_log:
        LOGGER.info("Finished training: final total=%.6f", loss_log[-1].total)
    return TrainResult(model=model, outputs=outputs, config=config, loss_log=loss_log)
