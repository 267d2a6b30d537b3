"""Mini-batch training for the classifier heads."""
from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .embeddings import EmbeddingProvider
from .heads import Head, batch_grads

# batch size / learning rate per model, trained for 100 epochs with 1% warmup using Adam
PUBLISHED_PRESETS = {
    "surface": (10, 2e-5),
    "norm": (40, 3e-5),
    "nullc": (30, 3e-5),
    "relation": (50, 7e-5),
}


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    batch_size: int = 10
    learning_rate: float = 2e-5
    epochs: int = 100
    warmup_fraction: float = 0.01
    seed: int = 0
    class_weights: Optional[List[float]] = None
    optimizer: str = "sgd"  # sgd | adam

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if not 0 <= self.warmup_fraction < 1:
            raise ValueError("warmup_fraction must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")

    @classmethod
    def published(cls, head: str, **overrides) -> "TrainConfig":
        batch, lr = PUBLISHED_PRESETS[head]
        kw = dict(batch_size=batch, learning_rate=lr, epochs=100, warmup_fraction=0.01, optimizer="adam")
        kw.update(overrides)
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


Example = Tuple[np.ndarray, np.ndarray]


def embed_dataset(provider: EmbeddingProvider, dataset: Sequence[Tuple[Sequence[str], object]]) -> List[Example]:
    return [(provider.embed(list(units)), np.asarray(gold)) for units, gold in dataset]


class Trainer:
    """Stateful epoch-by-epoch trainer for one head."""

    def __init__(self, head: Head, examples: Sequence[Example], cfg: TrainConfig):
        if not len(examples):
            raise ValueError("training set is empty")
        self.head = head
        self.examples = list(examples)
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.steps_per_epoch = math.ceil(len(self.examples) / cfg.batch_size)
        self.total_steps = max(1, self.steps_per_epoch * cfg.epochs)
        self.warmup_steps = int(round(cfg.warmup_fraction * self.total_steps))
        self.step = 0
        self.epoch = 0
        self.losses: List[float] = []
        self._m = {k: np.zeros_like(v) for k, v in head.all_params().items()}
        self._v = {k: np.zeros_like(v) for k, v in head.all_params().items()}

    def lr(self) -> float:
        if self.warmup_steps and self.step < self.warmup_steps:
            return self.cfg.learning_rate * (self.step + 1) / self.warmup_steps
        return self.cfg.learning_rate

    def update(self, grads: Dict[str, np.ndarray]) -> None:
        lr = self.lr()
        params = self.head.all_params()
        for name, g in grads.items():
            if self.cfg.optimizer == "sgd":
                step = g
            else:
                t = self.step + 1
                self._m[name] = 0.9 * self._m[name] + 0.1 * g
                self._v[name] = 0.999 * self._v[name] + 0.001 * g * g
                mhat = self._m[name] / (1 - 0.9 ** t)
                vhat = self._v[name] / (1 - 0.999 ** t)
                step = mhat / (np.sqrt(vhat) + 1e-8)
            params[name] -= lr * step
        self.step += 1

    def run_epoch(self) -> float:
        order = self.rng.permutation(len(self.examples))
        total = 0.0
        for b in range(self.steps_per_epoch):
            idx = order[b * self.cfg.batch_size:(b + 1) * self.cfg.batch_size]
            X = [self.examples[i][0] for i in idx]
            y = [self.examples[i][1] for i in idx]
            loss, grads = batch_grads(self.head, X, y, self.cfg.class_weights)
            if not math.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {self.epoch + 1}, step {self.step + 1}")
            total += loss * len(idx)
            self.update(grads)
        self.epoch += 1
        mean = total / len(self.examples)
        self.losses.append(mean)
        return mean


@dataclass
class TrainResult:
    head: Head
    losses: List[float]
    dev_scores: List[float] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_head: Optional[Head] = None


def train(
    head: Head,
    provider: Optional[EmbeddingProvider],
    dataset: Sequence,
    cfg: TrainConfig,
    dev_metric: Optional[Callable[[Head], float]] = None,
) -> TrainResult:
    """Train ``head`` in place.

    ``dataset`` holds (units, gold) pairs embedded with ``provider``, or
    ready (X, gold) arrays when ``provider`` is None. When ``dev_metric`` is
    given it is evaluated after every epoch and the best-scoring copy of the
    head is kept.
    """
    examples = embed_dataset(provider, dataset) if provider is not None else list(dataset)
    trainer = Trainer(head, examples, cfg)
    result = TrainResult(head, trainer.losses)
    for _ in range(cfg.epochs):
        trainer.run_epoch()
        if dev_metric is not None:
            score = dev_metric(head)
            result.dev_scores.append(score)
            if result.best_epoch is None or score > result.dev_scores[result.best_epoch - 1]:
                result.best_epoch = trainer.epoch
                result.best_head = copy.deepcopy(head)
    return result


def accuracy(head: Head, examples: Sequence[Example]) -> float:
    right = total = 0
    for X, y in examples:
        pred = head.predict(X)
        right += int((pred == np.asarray(y)).sum())
        total += np.asarray(y).size
    return right / total if total else 1.0
