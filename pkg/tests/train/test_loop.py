"""Tests for the training loop."""

from pathlib import Path

import pytest
import torch

from nearmiss.model.checkpoint import load_checkpoint
from nearmiss.model.config import PathwayConfig
from nearmiss.model.slowfast import build_slowfast
from nearmiss.train.curve import TrainingCurve
from nearmiss.train.loop import (
    EvalResult,
    TrainingError,
    _improves,
    evaluate,
    fit,
    make_loader,
    make_optimizer,
    train_epoch,
)
from nearmiss.train.schedule import OptimConfig, ScheduleConfig

Sample = tuple[torch.Tensor, torch.Tensor, int]


def random_samples(n: int, seed: int = 0) -> list[Sample]:
    """``n`` random 32 px frame pairs with alternating labels."""
    gen = torch.Generator().manual_seed(seed)
    return [
        (
            torch.randn(3, 2, 32, 32, generator=gen),
            torch.randn(3, 8, 32, 32, generator=gen),
            i % 2,
        )
        for i in range(n)
    ]


def result(accuracy: float, loss: float) -> EvalResult:
    """Evaluation result carrying only accuracy and loss."""
    return EvalResult(
        loss=loss,
        accuracy=accuracy,
        predictions=[],
        labels=[],
        probabilities=[],
    )


class TestFit:
    """Test end-to-end training on random tensors."""

    def test_two_epochs(
        self, tmp_path: Path, tiny_config: PathwayConfig
    ) -> None:
        """Test checkpoints and curve lengths after two short epochs."""
        model = build_slowfast(tiny_config)
        curve_paths = (tmp_path / "curve.jsonl", tmp_path / "val.jsonl")

        outcome = fit(
            model,
            random_samples(4),
            random_samples(2, seed=1),
            ScheduleConfig(warmup_epochs=1, t_max=2),
            OptimConfig(batch_size=2, max_epochs=2),
            tmp_path / "checkpoints",
            seed=3,
            normalization={"mean": [0.0] * 3, "std": [1.0] * 3},
            curve_paths=curve_paths,
        )

        assert outcome.best_path.exists()
        assert outcome.last_path.exists()
        assert outcome.curve.iterations == 4
        assert len(outcome.curve.validation) == 2
        assert [p.iteration for p in outcome.curve.points] == [0, 1, 2, 3]
        assert TrainingCurve.read(*curve_paths) == outcome.curve
        last = load_checkpoint(outcome.last_path, tiny_config)
        assert last.epoch == 1
        assert last.normalization["std"] == [1.0] * 3
        assert outcome.best.epoch in {0, 1}

    def test_epoch_learning_rates(
        self, tmp_path: Path, tiny_config: PathwayConfig
    ) -> None:
        """Test that each epoch trains at its scheduled rate."""
        outcome = fit(
            build_slowfast(tiny_config),
            random_samples(2),
            random_samples(2),
            ScheduleConfig(warmup_epochs=1, t_max=2),
            OptimConfig(batch_size=2, max_epochs=3),
            tmp_path,
        )

        lrs = [v.lr for v in outcome.curve.validation]
        assert lrs == pytest.approx([0.01, 0.1, 0.0], abs=1e-12)

    def test_empty_split(
        self, tmp_path: Path, tiny_config: PathwayConfig
    ) -> None:
        """Test that an empty training split is refused."""
        with pytest.raises(TrainingError, match="training split is empty"):
            fit(
                build_slowfast(tiny_config),
                [],
                random_samples(2),
                ScheduleConfig(warmup_epochs=1, t_max=2),
                OptimConfig(batch_size=2, max_epochs=1),
                tmp_path,
            )


class TestTrainEpoch:
    """Test single epochs."""

    def test_no_batches(self, tiny_config: PathwayConfig) -> None:
        """Test that an epoch needs at least one batch."""
        model = build_slowfast(tiny_config)
        optimizer = make_optimizer(model, OptimConfig(), 0.1)

        with pytest.raises(TrainingError, match="no training batches"):
            train_epoch(model, [], optimizer, 0.1, epoch=4)

    def test_non_finite_loss(self, tiny_config: PathwayConfig) -> None:
        """Test that a NaN loss stops training."""
        model = build_slowfast(tiny_config, guard=False)
        optimizer = make_optimizer(model, OptimConfig(), 0.1)
        slow = torch.full((2, 3, 2, 32, 32), float("nan"))
        fast = torch.zeros(2, 3, 8, 32, 32)
        batch = (slow, fast, torch.tensor([0, 1]))

        with pytest.raises(TrainingError, match="non-finite loss"):
            train_epoch(model, [batch], optimizer, 0.1)

    def test_per_batch_rate(self, tiny_config: PathwayConfig) -> None:
        """Test that a per-batch override is recorded per point."""
        model = build_slowfast(tiny_config)
        optimizer = make_optimizer(model, OptimConfig(), 0.1)
        loader = make_loader(random_samples(4), 2, shuffle=False)

        stats = train_epoch(
            model,
            loader,
            optimizer,
            0.1,
            start_iteration=10,
            lr_for_batch=lambda i: 0.1 / (i + 1),
        )

        assert [p.lr for p in stats.points] == [0.1, 0.05]
        assert [p.iteration for p in stats.points] == [10, 11]
        assert stats.samples == 4


class TestEvaluate:
    """Test evaluation."""

    def test_restores_mode(self, tiny_config: PathwayConfig) -> None:
        """Test that a training model is back in train mode afterwards."""
        model = build_slowfast(tiny_config)
        loader = make_loader(random_samples(3), 2, shuffle=False)

        outcome = evaluate(model, loader)

        assert model.training
        assert outcome.labels == [0, 1, 0]
        assert len(outcome.probabilities) == 3
        assert 0.0 <= outcome.accuracy <= 1.0

    def test_empty(self, tiny_config: PathwayConfig) -> None:
        """Test that an empty split cannot be evaluated."""
        with pytest.raises(TrainingError, match="empty split"):
            evaluate(build_slowfast(tiny_config), [])

    def test_improves_prefers_accuracy_then_loss(self) -> None:
        """Test checkpoint selection order."""
        assert _improves(result(0.5, 1.0), None)
        assert _improves(result(0.6, 2.0), result(0.5, 1.0))
        assert _improves(result(0.5, 0.9), result(0.5, 1.0))
        assert not _improves(result(0.5, 1.0), result(0.5, 1.0))
        assert not _improves(result(0.4, 0.1), result(0.5, 1.0))
