from __future__ import annotations

import torch
from torch import nn

from src.model.topics import gene_topic_matrix
from src.model.train_config import HIDDEN_UNITS
from src.numerics.tensor_core import DTYPE, check_finite, softmax_rows

EMBEDDING_INIT_STD = 0.02


class CrossViewTopicModel(nn.Module):
    """Cell-topic head f(x), cell-cluster head g(v), and the gene/topic embeddings.

    f is a two-layer Tanh MLP producing the posterior mean and log-variance
    of the pre-softmax latent; g maps the external embedding straight to K
    cluster logits. The decoder has no weights of its own: it is the
    gene-topic matrix O built from the distances between G and T.
    """

    def __init__(self, n_genes: int, view_dim: int, n_topics: int, embed_dim: int, tau: float = 0.1) -> None:
        super().__init__()
        if tau <= 0:
            raise ValueError(f"tau must be > 0, got {tau}")
        self.n_genes = n_genes
        self.view_dim = view_dim
        self.n_topics = n_topics
        self.embed_dim = embed_dim
        self.tau = tau

        self.encoder = nn.Sequential(
            nn.Linear(n_genes, HIDDEN_UNITS),
            nn.Tanh(),
            nn.Linear(HIDDEN_UNITS, HIDDEN_UNITS),
            nn.Tanh(),
        )
        self.mu_head = nn.Linear(HIDDEN_UNITS, n_topics)
        self.logvar_head = nn.Linear(HIDDEN_UNITS, n_topics)
        self.cluster_head: nn.Module | None = None
        if view_dim > 0:
            self.cluster_head = nn.Sequential(
                nn.Linear(view_dim, HIDDEN_UNITS),
                nn.Tanh(),
                nn.Linear(HIDDEN_UNITS, n_topics),
            )
        self.topic_embeddings = nn.Parameter(torch.empty(n_topics, embed_dim, dtype=DTYPE))
        self.gene_embeddings = nn.Parameter(torch.empty(n_genes, embed_dim, dtype=DTYPE))
        self.register_buffer("gene_background", torch.zeros(n_genes, dtype=DTYPE))
        self.to(DTYPE)
        self.reset_parameters()

    def reset_parameters(self) -> None:
        for module in self.modules():
            if isinstance(module, nn.Linear):
                nn.init.xavier_uniform_(module.weight)
                nn.init.zeros_(module.bias)
        nn.init.normal_(self.topic_embeddings, mean=0.0, std=EMBEDDING_INIT_STD)
        nn.init.normal_(self.gene_embeddings, mean=0.0, std=EMBEDDING_INIT_STD)

    def encode(
        self,
        x: torch.Tensor,
        generator: torch.Generator | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """theta = softmax(mu + sigma * zeta); zeta ~ N(0, I) in training mode, 0 at inference."""
        hidden = self.encoder(x)
        mu = self.mu_head(hidden)
        logvar = self.logvar_head(hidden)
        check_finite(mu, "encoder mu")
        check_finite(logvar, "encoder logvar")
        if self.training:
            zeta = torch.randn(mu.shape, generator=generator, dtype=mu.dtype)
            z = mu + torch.exp(0.5 * logvar) * zeta
        else:
            z = mu
        return softmax_rows(z), mu, logvar

    def forward(
        self,
        x: torch.Tensor,
        generator: torch.Generator | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        return self.encode(x, generator=generator)

    def encode_external(self, v: torch.Tensor) -> torch.Tensor:
        if self.cluster_head is None:
            raise ValueError("model was built without an external view")
        logits = self.cluster_head(v)
        check_finite(logits, "cluster head")
        return softmax_rows(logits)

    def gene_topic(self) -> torch.Tensor:
        return gene_topic_matrix(self.gene_embeddings, self.topic_embeddings, self.tau)

    def set_background(self, x: torch.Tensor) -> None:
        """Fix the decoder background to log((sum_i x_im + 1) / sum_m (sum_i x_im + 1))."""
        if x.shape[1] != self.n_genes:
            raise ValueError(f"expected {self.n_genes} genes, got {x.shape[1]}")
        freq = x.detach().to(DTYPE).sum(dim=0) + 1.0
        self.gene_background.copy_(torch.log(freq) - torch.log(freq.sum()))
