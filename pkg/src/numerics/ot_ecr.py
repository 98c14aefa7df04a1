from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import torch

from src.core.errors import NumericalError
from src.numerics.tensor_core import DTYPE, Matrix, pairwise_sq_dists

LOGGER = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.05
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 1000


@dataclass(frozen=True)
class TransportProblem:
    """Entropic OT between V gene embeddings (rows) and K topic embeddings (columns).

    Marginals are uniform on both sides: every gene carries 1/V and every
    topic receives 1/K, which rules out empty clusters.
    """

    cost: Matrix
    epsilon: float

    @property
    def n_rows(self) -> int:
        return int(self.cost.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.cost.shape[1])

    @property
    def row_marginal(self) -> Matrix:
        return torch.full((self.n_rows,), 1.0 / self.n_rows, dtype=DTYPE)

    @property
    def col_marginal(self) -> Matrix:
        return torch.full((self.n_cols,), 1.0 / self.n_cols, dtype=DTYPE)


@dataclass(frozen=True)
class TransportPlan:
    pi: Matrix
    converged: bool
    iterations: int
    marginal_violation: float


@dataclass(frozen=True)
class EcrResult:
    loss: torch.Tensor
    plan: TransportPlan


def marginal_violation(pi: Matrix) -> float:
    n_rows, n_cols = pi.shape
    rows = (pi.sum(dim=1) - 1.0 / n_rows).abs().sum()
    cols = (pi.sum(dim=0) - 1.0 / n_cols).abs().sum()
    return float(torch.maximum(rows, cols))


def entropic_objective(cost: Matrix, pi: Matrix, epsilon: float) -> float:
    """Transport cost plus epsilon * sum(pi * (log pi - 1))."""
    transport = (cost * pi).sum()
    entropy_term = (torch.special.xlogy(pi, pi) - pi).sum()
    return float(transport + epsilon * entropy_term)


def sinkhorn(
    problem: TransportProblem,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> TransportPlan:
    if problem.epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {problem.epsilon}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    cost = problem.cost.detach().to(DTYPE)
    if not bool(torch.isfinite(cost).all()):
        raise NumericalError("cost matrix has non-finite entries", term="sinkhorn")

    n_rows, n_cols = cost.shape
    log_a = -math.log(n_rows)
    log_b = -math.log(n_cols)
    # log kernel, shifted by each row's minimum cost so the largest entry per row is 0
    log_kernel = -(cost - cost.min(dim=1, keepdim=True).values) / problem.epsilon

    f = torch.zeros(n_rows, dtype=DTYPE)
    g = torch.zeros(n_cols, dtype=DTYPE)
    violation = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        g = log_b - torch.logsumexp(log_kernel + f.unsqueeze(1), dim=0)
        f = log_a - torch.logsumexp(log_kernel + g.unsqueeze(0), dim=1)
        pi = torch.exp(log_kernel + f.unsqueeze(1) + g.unsqueeze(0))
        violation = marginal_violation(pi)
        if violation < tol:
            break

    pi = torch.exp(log_kernel + f.unsqueeze(1) + g.unsqueeze(0))
    converged = violation < tol
    return TransportPlan(pi=pi, converged=converged, iterations=iterations, marginal_violation=violation)


def ecr_loss_with_plan(gene_embeddings: Matrix, topic_embeddings: Matrix, pi: Matrix) -> torch.Tensor:
    """sum_{m,k} ||g_m - t_k||^2 * pi_mk with the plan treated as a constant."""
    cost = pairwise_sq_dists(gene_embeddings, topic_embeddings)
    return (cost * pi.detach()).sum()


def ecr_loss(
    gene_embeddings: Matrix,
    topic_embeddings: Matrix,
    epsilon: float = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
) -> EcrResult:
    if gene_embeddings.shape[1] < 1:
        raise ValueError("embedding dimension must be >= 1")
    if gene_embeddings.shape[0] < topic_embeddings.shape[0]:
        raise ValueError(
            f"ECR needs at least as many genes as topics, got V={gene_embeddings.shape[0]} K={topic_embeddings.shape[0]}"
        )
    cost = pairwise_sq_dists(gene_embeddings, topic_embeddings)
    plan = sinkhorn(TransportProblem(cost=cost.detach(), epsilon=epsilon), max_iter=max_iter, tol=tol)
    if not plan.converged:
        LOGGER.warning(
            "Sinkhorn did not converge iterations=%s violation=%.3e tol=%.1e",
            plan.iterations,
            plan.marginal_violation,
            tol,
        )
    loss = (cost * plan.pi).sum()
    return EcrResult(loss=loss, plan=plan)
