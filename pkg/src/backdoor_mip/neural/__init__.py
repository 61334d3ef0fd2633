"""From-scratch differentiable stack: autograd, GAT model, losses, Adam."""

from .losses import bce_with_logits, margin_ranking_loss
from .model import (
    HyperParams,
    ModelParams,
    SchemaMismatchError,
    attention_pool,
    forward,
    gat_layer,
    init_params,
    score,
)
from .optim import Adam
from .training import TrainConfig, classify_accuracy, rank_accuracy, train_classifier, train_scorer

__all__ = [
    "Adam",
    "HyperParams",
    "ModelParams",
    "SchemaMismatchError",
    "TrainConfig",
    "attention_pool",
    "bce_with_logits",
    "classify_accuracy",
    "forward",
    "gat_layer",
    "init_params",
    "margin_ranking_loss",
    "rank_accuracy",
    "score",
    "train_classifier",
    "train_scorer",
]
