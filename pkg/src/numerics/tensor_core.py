"""Dense float64 matrix helpers shared by every loss term.

Matrices are plain ``torch.Tensor`` objects in float64; reverse-mode autograd
is the gradient mechanism, and ``grad_check`` is the contract every analytic
gradient used in training is tested against.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import torch

from src.core.errors import NumericalError

DTYPE = torch.float64

Matrix = torch.Tensor


def as_matrix(values: object, name: str = "matrix") -> Matrix:
    tensor = torch.as_tensor(values, dtype=DTYPE)
    if tensor.dim() == 1:
        tensor = tensor.unsqueeze(0)
    if tensor.dim() != 2:
        raise ValueError(f"{name} must be 2-D, got shape {tuple(tensor.shape)}")
    check_finite(tensor, name)
    return tensor


def check_finite(tensor: torch.Tensor, what: str) -> None:
    if not bool(torch.isfinite(tensor).all()):
        raise NumericalError("non-finite values", term=what)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.dim() != 2 or b.dim() != 2:
        raise ValueError(f"matmul expects 2-D operands, got {tuple(a.shape)} and {tuple(b.shape)}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {tuple(a.shape)} x {tuple(b.shape)}")
    return a @ b


def logsumexp_rows(m: Matrix) -> Matrix:
    # torch.logsumexp subtracts the row max before exponentiating.
    return torch.logsumexp(m, dim=1, keepdim=True)


def log_softmax_rows(m: Matrix) -> Matrix:
    return m - logsumexp_rows(m)


def softmax_rows(m: Matrix) -> Matrix:
    return torch.exp(log_softmax_rows(m))


def pairwise_sq_dists(a: Matrix, b: Matrix) -> Matrix:
    """Squared Euclidean distances between the rows of ``a`` (n x E) and ``b`` (m x E)."""
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"embedding width mismatch: {a.shape[1]} vs {b.shape[1]}")
    sq = (a * a).sum(dim=1, keepdim=True) + (b * b).sum(dim=1).unsqueeze(0) - 2.0 * (a @ b.T)
    return sq.clamp_min(0.0)


def grad_check(
    loss_fn: Callable[..., torch.Tensor],
    params: Sequence[torch.Tensor],
    step: float = 1e-5,
) -> float:
    """Largest relative gap between autograd and central finite differences.

    ``loss_fn`` is called with one tensor per entry of ``params`` and must
    return a scalar. Relative error per entry is
    ``|analytic - numeric| / max(1e-8, |analytic| + |numeric|)``.
    """
    leaves = [p.detach().clone().to(DTYPE).requires_grad_(True) for p in params]
    loss = loss_fn(*leaves)
    if loss.numel() != 1:
        raise ValueError("grad_check needs a scalar loss")
    if not bool(torch.isfinite(loss)):
        raise NumericalError("loss is not finite at the given parameters", term="grad_check")
    grads = torch.autograd.grad(loss, leaves, allow_unused=True)

    base = [leaf.detach().clone() for leaf in leaves]
    worst = 0.0
    with torch.no_grad():
        for index, value in enumerate(base):
            analytic = grads[index]
            analytic_flat = (
                np.zeros(value.numel()) if analytic is None else analytic.detach().reshape(-1).numpy()
            )
            flat = value.reshape(-1)
            for entry in range(flat.numel()):
                original = float(flat[entry])
                flat[entry] = original + step
                plus = float(loss_fn(*base))
                flat[entry] = original - step
                minus = float(loss_fn(*base))
                flat[entry] = original
                numeric = (plus - minus) / (2.0 * step)
                got = float(analytic_flat[entry])
                denom = max(1e-8, abs(got) + abs(numeric))
                worst = max(worst, abs(got - numeric) / denom)
    return worst
