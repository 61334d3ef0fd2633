"""Seeded training loops for the scorer and the classifier."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..encode import BipartiteGraph
from .losses import bce_with_logits, margin_ranking_loss
from .model import HyperParams, ModelParams, forward, init_params
from .optim import Adam


@dataclass(frozen=True)
class TrainConfig:
    margin: float = 0.1
    learning_rate: float = 1e-3
    epochs: int = 30
    batch_size: int = 32
    seed: int = 0
    hyperparams: HyperParams = HyperParams()

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")


def _check_finite(loss: float, context: str):
    if not math.isfinite(loss):
        raise FloatingPointError(f"non-finite loss during {context}: {loss}")


def train_scorer(
    pairs: list[tuple[BipartiteGraph, BipartiteGraph, int]],
    config: TrainConfig = TrainConfig(),
) -> tuple[ModelParams, list[float]]:
    """Fit the ranking scorer on (graph1, graph2, y) pairs; y=-1 means the
    first candidate was faster. Returns (params, per-epoch mean loss)."""
    if not pairs:
        raise ValueError("empty training set")
    params = init_params(config.seed, config.hyperparams)
    opt = Adam(params, lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)
    history = []
    for _ in range(config.epochs):
        order = rng.permutation(len(pairs))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            params.zero_grad()
            batch_loss = 0.0
            for idx in batch:
                g1, g2, y = pairs[idx]
                loss = margin_ranking_loss(forward(params, g1), forward(params, g2), y, config.margin)
                _check_finite(loss.item(), "scorer training")
                (loss * (1.0 / len(batch))).backward()
                batch_loss += loss.item()
            opt.step()
            total += batch_loss
        history.append(total / len(pairs))
    return params, history


def train_classifier(
    examples: list[tuple[BipartiteGraph, int]],
    config: TrainConfig = TrainConfig(),
) -> tuple[ModelParams, list[float]]:
    """Fit the accept/decline classifier on (graph, label) examples; label 1
    means the candidate beat the default solver."""
    if not examples:
        raise ValueError("empty training set")
    params = init_params(config.seed, config.hyperparams)
    opt = Adam(params, lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)
    history = []
    for _ in range(config.epochs):
        order = rng.permutation(len(examples))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            params.zero_grad()
            for idx in batch:
                graph, label = examples[idx]
                loss = bce_with_logits(forward(params, graph), float(label))
                _check_finite(loss.item(), "classifier training")
                (loss * (1.0 / len(batch))).backward()
                total += loss.item()
            opt.step()
        history.append(total / len(examples))
    return params, history


def rank_accuracy(params: ModelParams, pairs) -> float:
    """Share of pairs ranked consistently with their labels (strict margin-free)."""
    ok = 0
    for g1, g2, y in pairs:
        s1 = forward(params, g1).item()
        s2 = forward(params, g2).item()
        ok += (s1 < s2) if y == -1 else (s1 > s2)
    return ok / len(pairs)


def classify_accuracy(params: ModelParams, examples) -> float:
    ok = 0
    for graph, label in examples:
        ok += (forward(params, graph).item() > 0.0) == bool(label)
    return ok / len(examples)
