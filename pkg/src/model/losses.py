"""Loss terms of the topic model, each a scalar tensor that autograd can differentiate."""

from __future__ import annotations

import torch
import torch.nn.functional as F

from src.core.errors import NumericalError
from src.numerics.tensor_core import Matrix, log_softmax_rows

DEFAULT_TEMPERATURE = 0.5
REG_REDUCTIONS = ("sum", "mean")


def gaussian_kl(mu: Matrix, logvar: Matrix) -> Matrix:
    """Per-row KL(N(mu, diag exp(logvar)) || N(0, I))."""
    return 0.5 * (torch.exp(logvar) + mu * mu - 1.0 - logvar).sum(dim=1)


def loss_re(
    theta: Matrix,
    gene_topic: Matrix,
    x: Matrix,
    mu: Matrix,
    logvar: Matrix,
    background: torch.Tensor | None = None,
) -> torch.Tensor:
    """Batch-mean negative log-likelihood under softmax(theta O^T + b) plus the Gaussian KL.

    ``background`` is a fixed per-gene log-frequency b; None means b = 0.
    """
    if bool((x < 0).any()):
        raise ValueError("expression batch has negative entries")
    if theta.shape[0] != x.shape[0] or gene_topic.shape[0] != x.shape[1]:
        raise ValueError(
            f"shape mismatch: theta {tuple(theta.shape)}, O {tuple(gene_topic.shape)}, x {tuple(x.shape)}"
        )
    logits = theta @ gene_topic.T
    if background is not None:
        if background.shape != (x.shape[1],):
            raise ValueError(f"background has shape {tuple(background.shape)}, expected ({x.shape[1]},)")
        logits = logits + background
    log_rate = log_softmax_rows(logits)
    reconstruction = -(x * log_rate).sum(dim=1)
    return (reconstruction + gaussian_kl(mu, logvar)).mean()


def loss_con(theta: Matrix, phi: Matrix) -> torch.Tensor:
    """Batch-level assignment agreement: -log sum_i <theta_i, phi_i>."""
    if theta.shape != phi.shape:
        raise ValueError(f"theta {tuple(theta.shape)} and phi {tuple(phi.shape)} differ")
    agreement = (theta * phi).sum()
    if float(agreement) <= 0.0:
        raise NumericalError("sum of cross-view inner products is zero", term="L_CON")
    return -torch.log(agreement)


def _info_nce(anchor: Matrix, positive: Matrix, temperature: float) -> torch.Tensor:
    """Row i of ``anchor`` against positive[i]; negatives are positive[j] and anchor[j] for j != i."""
    anchor_n = F.normalize(anchor, dim=1)
    positive_n = F.normalize(positive, dim=1)
    cross = anchor_n @ positive_n.T / temperature
    same = anchor_n @ anchor_n.T / temperature
    eye = torch.eye(anchor.shape[0], dtype=torch.bool)
    same = same.masked_fill(eye, float("-inf"))
    logits = torch.cat([cross, same], dim=1)
    return -(torch.diagonal(cross) - torch.logsumexp(logits, dim=1))


def loss_nei(
    theta: Matrix,
    phi: Matrix,
    theta_nei: Matrix,
    phi_nei: Matrix,
    temperature: float = DEFAULT_TEMPERATURE,
) -> torch.Tensor:
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    if not theta.shape == phi.shape == theta_nei.shape == phi_nei.shape:
        raise ValueError("loss_nei inputs must share one B x K shape")
    x_to_v = _info_nce(phi, theta_nei, temperature)
    v_to_x = _info_nce(theta, phi_nei, temperature)
    return (x_to_v + v_to_x).mean()


def loss_reg(theta: Matrix, phi: Matrix, batch_entropy: bool = False, reduction: str = "sum") -> torch.Tensor:
    """Per-row entropy of both assignment matrices (0 log 0 = 0), summed or averaged over rows.

    With ``batch_entropy`` the entropy of the batch-mean assignment is used
    instead, scaled by the batch size under "sum" so both variants share a range.
    """
    if reduction not in REG_REDUCTIONS:
        raise ValueError(f"reduction must be one of {REG_REDUCTIONS}, got {reduction!r}")
    rows = float(theta.shape[0])
    if batch_entropy:
        scale = rows if reduction == "sum" else 1.0
        theta = theta.mean(dim=0, keepdim=True)
        phi = phi.mean(dim=0, keepdim=True)
    else:
        scale = 1.0 if reduction == "sum" else 1.0 / rows
    entropy = -(torch.special.xlogy(theta, theta).sum() + torch.special.xlogy(phi, phi).sum())
    return scale * entropy
