import math

import numpy as np
import pytest

from camrkit.heads import LinearTagHead
from camrkit.training import PUBLISHED_PRESETS, TrainConfig, Trainer, TrainingError, accuracy, train


def separable(n=40, d=6, c=3, seed=0):
    """Each class owns one coordinate; inputs are noisy one-hots."""
    rng = np.random.default_rng(seed)
    data = []
    for _ in range(n):
        y = rng.integers(0, c, 4)
        X = rng.normal(0, 0.05, (4, d))
        X[np.arange(4), y] += 1.0
        data.append((X, y))
    return data


def test_reaches_full_accuracy_within_50_epochs():
    data = separable()
    head = LinearTagHead(6, 3, seed=0)
    cfg = TrainConfig(batch_size=4, learning_rate=0.5, epochs=50, seed=0)
    train(head, None, data, cfg)
    assert accuracy(head, data) == 1.0


def test_reruns_are_byte_identical(tmp_path):
    for k in range(2):
        head = LinearTagHead(6, 3, context_hidden=2, seed=1)
        train(head, None, separable(), TrainConfig(batch_size=5, learning_rate=0.1, epochs=3, seed=4, optimizer="adam"))
        head.save(tmp_path / f"{k}.json")
    assert (tmp_path / "0.json").read_bytes() == (tmp_path / "1.json").read_bytes()


def test_warmup_is_linear():
    t = Trainer(LinearTagHead(6, 3), separable(10), TrainConfig(batch_size=1, learning_rate=1.0, epochs=10,
                                                                 warmup_fraction=0.1))
    assert t.warmup_steps == 10
    rates = []
    for _ in range(12):
        rates.append(t.lr())
        t.step += 1
    assert rates[:10] == pytest.approx([(k + 1) / 10 for k in range(10)])
    assert rates[10:] == [1.0, 1.0]


def test_loss_decreases():
    head = LinearTagHead(6, 3, seed=0)
    res = train(head, None, separable(), TrainConfig(batch_size=4, learning_rate=0.5, epochs=10))
    assert res.losses[-1] < res.losses[0]


def test_dev_metric_keeps_best():
    head = LinearTagHead(6, 3, seed=0)
    scores = iter([0.1, 0.5, 0.3])
    res = train(head, None, separable(), TrainConfig(epochs=3, learning_rate=0.1), dev_metric=lambda h: next(scores))
    assert res.best_epoch == 2 and res.dev_scores == [0.1, 0.5, 0.3]
    assert res.best_head is not None


def test_nan_aborts():
    data = separable()
    data[0] = (np.full_like(data[0][0], np.nan), data[0][1])
    with pytest.raises(TrainingError):
        train(LinearTagHead(6, 3), None, data, TrainConfig(epochs=1, batch_size=100))


def test_zero_epochs_leave_head_untouched():
    head = LinearTagHead(6, 3, seed=0)
    before = head.params["W"].copy()
    train(head, None, separable(), TrainConfig(epochs=0))
    assert np.array_equal(before, head.params["W"])


@pytest.mark.parametrize("kw", [dict(learning_rate=-1), dict(batch_size=0), dict(warmup_fraction=1.0),
                                dict(epochs=-1), dict(optimizer="rmsprop")])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        TrainConfig(**kw)


def test_published_presets():
    cfg = TrainConfig.published("relation")
    assert (cfg.batch_size, cfg.learning_rate, cfg.epochs, cfg.warmup_fraction, cfg.optimizer) == (50, 7e-5, 100, 0.01, "adam")
    assert PUBLISHED_PRESETS["surface"] == (10, 2e-5)
    assert PUBLISHED_PRESETS["norm"] == (40, 3e-5)
    assert PUBLISHED_PRESETS["nullc"] == (30, 3e-5)


def test_empty_training_set():
    with pytest.raises(ValueError):
        Trainer(LinearTagHead(2, 2), [], TrainConfig())
