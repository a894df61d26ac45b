"""Teacher-forced next-item training at toy scale.

Each session is fed through the encoder once; the logits at position t
are trained against the item at t+1 with cross-entropy, padding masked
out. Adam at learning rate 0.001; fully deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .data import load_sessions, load_vocab
from .model import ToyNeuralModel

PAD = -100  # ignore_index for the loss; padded inputs use item 0


@dataclass(frozen=True)
class TrainSettings:
    epochs: int = 3
    dim: int = 32
    seed: int = 0
    batch_size: int = 64
    learning_rate: float = 1e-3
    valid_fraction: float = 0.1


def _batches(sessions: list[list[int]], batch_size: int):
    for start in range(0, len(sessions), batch_size):
        chunk = sessions[start : start + batch_size]
        width = max(len(s) for s in chunk)
        inputs = torch.zeros((len(chunk), width - 1), dtype=torch.long)
        targets = torch.full((len(chunk), width - 1), PAD, dtype=torch.long)
        for r, s in enumerate(chunk):
            seq = torch.tensor(s, dtype=torch.long)
            inputs[r, : len(s) - 1] = seq[:-1]
            targets[r, : len(s) - 1] = seq[1:]
        yield inputs, targets


def _epoch_loss(model, sessions, batch_size, loss_fn, optimizer=None) -> float:
    total, count = 0.0, 0
    for inputs, targets in _batches(sessions, batch_size):
        logits = model.stepwise_logits(inputs)
        loss = loss_fn(logits.reshape(-1, model.n_items), targets.reshape(-1))
        if optimizer is not None:
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
        valid = int((targets != PAD).sum())
        total += float(loss.detach()) * valid
        count += valid
    return total / max(count, 1)


def train_toy_teacher(
    train_file: str | Path,
    vocab_file: str | Path,
    settings: TrainSettings = TrainSettings(),
    delimiter: str = ",",
    has_header: bool = False,
) -> ToyNeuralModel:
    """Train the toy encoder on a session split file."""
    vocab = load_vocab(vocab_file)
    sessions = load_sessions(train_file, vocab, delimiter, has_header)

    torch.manual_seed(settings.seed)
    torch.set_num_threads(1)  # keeps reruns bit-identical
    model = ToyNeuralModel(len(vocab), settings.dim)

    holdout = max(1, int(len(sessions) * settings.valid_fraction))
    valid_sessions = sessions[-holdout:]
    train_sessions = sessions[:-holdout] or sessions

    optimizer = torch.optim.Adam(model.parameters(), lr=settings.learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)
    for epoch in range(settings.epochs):
        model.train()
        train_loss = _epoch_loss(model, train_sessions, settings.batch_size, loss_fn, optimizer)
        model.eval()
        with torch.no_grad():
            valid_loss = _epoch_loss(model, valid_sessions, settings.batch_size, loss_fn)
        print(
            f"epoch {epoch + 1}/{settings.epochs} "
            f"train_loss={train_loss:.4f} valid_loss={valid_loss:.4f}",
            flush=True,
        )
    return model
