"""Siamese graph-attention embedder trained with a triplet margin loss."""

from .checkpoint import Checkpoint
from .model import EmbedderConfig, embed, embed_many, forward, init_params, make_batch
from .training import (
    TrainConfig,
    TrainResult,
    TrainState,
    Triplet,
    adamw_step,
    batch_loss,
    loss_and_grad,
    sample_triplets,
    train,
    triplet_margin_loss,
)

__all__ = [
    "Checkpoint",
    "EmbedderConfig",
    "TrainConfig",
    "TrainResult",
    "TrainState",
    "Triplet",
    "adamw_step",
    "batch_loss",
    "embed",
    "embed_many",
    "forward",
    "init_params",
    "loss_and_grad",
    "make_batch",
    "sample_triplets",
    "train",
    "triplet_margin_loss",
]
