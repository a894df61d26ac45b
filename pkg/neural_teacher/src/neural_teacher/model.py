"""Compact GRU session encoder scoring all items in the embedding space.

Output logits are the dot products between the final hidden state and
the (tied) item embedding table, so the model stays small and a
single-item session is just a length-1 forward pass.
"""

from __future__ import annotations

import torch
from torch import nn


class ToyNeuralModel(nn.Module):
    def __init__(self, n_items: int, dim: int = 32):
        super().__init__()
        if dim > 64:
            raise ValueError(f"toy model caps the embedding width at 64, got {dim}")
        self.n_items = n_items
        self.dim = dim
        self.embedding = nn.Embedding(n_items, dim)
        self.encoder = nn.GRU(dim, dim, batch_first=True)

    def forward(self, batch: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        """Logits for the item following each padded sequence in the batch."""
        emb = self.embedding(batch)
        outputs, _ = self.encoder(emb)
        last = outputs[torch.arange(batch.shape[0]), lengths - 1]
        return last @ self.embedding.weight.T

    def stepwise_logits(self, batch: torch.Tensor) -> torch.Tensor:
        """Logits at every position (for teacher-forced training)."""
        outputs, _ = self.encoder(self.embedding(batch))
        return outputs @ self.embedding.weight.T

    @torch.no_grad()
    def single_item_logits(self) -> torch.Tensor:
        """n x n logit matrix: row i scores the session [item_i]."""
        self.eval()
        items = torch.arange(self.n_items).unsqueeze(1)
        lengths = torch.ones(self.n_items, dtype=torch.long)
        return self.forward(items, lengths)
