from src.numerics.ot_ecr import EcrResult, TransportPlan, TransportProblem, ecr_loss, sinkhorn
from src.numerics.tensor_core import DTYPE, grad_check, log_softmax_rows, logsumexp_rows, matmul, softmax_rows

__all__ = [
    "DTYPE",
    "EcrResult",
    "TransportPlan",
    "TransportProblem",
    "ecr_loss",
    "grad_check",
    "log_softmax_rows",
    "logsumexp_rows",
    "matmul",
    "sinkhorn",
    "softmax_rows",
]
