"""SGD training loop, evaluation and checkpoint selection.

One update per batch, through ``torch.optim.SGD`` with momentum and
weight decay::

    velocity = momentum * velocity + grad + weight_decay * param
    param   -= lr * velocity
"""

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F
from torch.utils.data import DataLoader, Dataset

from nearmiss.core.errors import NearMissError
from nearmiss.core.logger import get_logger
from nearmiss.core.seeding import seed_everything
from nearmiss.model.checkpoint import Checkpoint, save_checkpoint
from nearmiss.model.slowfast import SlowFast
from nearmiss.train.curve import CurvePoint, TrainingCurve, ValidationPoint
from nearmiss.train.schedule import OptimConfig, ScheduleConfig, epoch_lr

logger = get_logger(__name__)

Batch = tuple[torch.Tensor, torch.Tensor, torch.Tensor]


class TrainingError(NearMissError):
    """Raised when training cannot continue."""


@dataclass(frozen=True)
class EpochStats:
    """Aggregates of one training epoch."""

    epoch: int
    lr: float
    mean_loss: float
    top1_error: float
    samples: int
    points: tuple[CurvePoint, ...]


@dataclass(frozen=True)
class EvalResult:
    """Loss, accuracy and per-sample outputs on one split."""

    loss: float
    accuracy: float
    predictions: list[int]
    labels: list[int]
    probabilities: list[list[float]]

    @property
    def top1_error(self) -> float:
        """``1 - accuracy``."""
        return 1.0 - self.accuracy


@dataclass(frozen=True)
class FitResult:
    """Outcome of :func:`fit`."""

    best: Checkpoint
    best_path: Path
    last_path: Path
    curve: TrainingCurve


def model_device(model: torch.nn.Module) -> torch.device:
    """Device holding the model's parameters."""
    return next(model.parameters()).device


def make_optimizer(
    model: torch.nn.Module, optim: OptimConfig, lr: float
) -> torch.optim.SGD:
    """SGD with the configured momentum and weight decay."""
    return torch.optim.SGD(
        model.parameters(),
        lr=lr,
        momentum=optim.momentum,
        weight_decay=optim.weight_decay,
    )


def set_lr(optimizer: torch.optim.Optimizer, lr: float) -> None:
    """Apply ``lr`` to every parameter group."""
    for group in optimizer.param_groups:
        group["lr"] = lr


def train_epoch(  # noqa: PLR0913
    model: SlowFast,
    batches: Iterable[Batch],
    optimizer: torch.optim.Optimizer,
    lr: float,
    *,
    epoch: int = 0,
    start_iteration: int = 0,
    lr_for_batch: Callable[[int], float] | None = None,
) -> EpochStats:
    """Run one epoch of cross-entropy SGD.

    Args:
        model: Network; switched to train mode
        batches: ``(slow, fast, label)`` batches
        optimizer: Optimizer over ``model``'s parameters
        lr: Learning rate for the epoch
        epoch: Epoch number recorded in the stats
        start_iteration: Global index of the first batch
        lr_for_batch: Per-batch rate override (per-iteration schedule)

    Returns:
        Epoch aggregates and one curve point per batch

    Raises:
        TrainingError: If the data is empty or a loss is not finite

    """
    model.train()
    device = model_device(model)
    points: list[CurvePoint] = []
    loss_sum = 0.0
    wrong = 0
    seen = 0
    for i, (slow, fast, labels) in enumerate(batches):
        batch_lr = lr_for_batch(i) if lr_for_batch is not None else lr
        set_lr(optimizer, batch_lr)
        slow, fast = slow.to(device), fast.to(device)
        labels = labels.to(device)
        logits = model(slow, fast)
        loss = F.cross_entropy(logits, labels)
        if not bool(torch.isfinite(loss)):
            msg = (
                f"non-finite loss {loss.item()} at batch {i} of epoch {epoch}"
            )
            raise TrainingError(msg)
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()

        batch_size = labels.shape[0]
        batch_wrong = int((logits.argmax(dim=1) != labels).sum())
        batch_loss = float(loss.detach())
        loss_sum += batch_loss * batch_size
        wrong += batch_wrong
        seen += batch_size
        points.append(
            CurvePoint(
                iteration=start_iteration + i,
                epoch=epoch,
                lr=batch_lr,
                loss=batch_loss,
                top1_error=batch_wrong / batch_size,
            )
        )
        logger.debug(
            "epoch %d batch %d: loss %.4f top1 error %.3f",
            epoch,
            i,
            batch_loss,
            batch_wrong / batch_size,
        )
    if seen == 0:
        msg = f"no training batches in epoch {epoch}"
        raise TrainingError(msg)
    return EpochStats(
        epoch=epoch,
        lr=lr,
        mean_loss=loss_sum / seen,
        top1_error=wrong / seen,
        samples=seen,
        points=tuple(points),
    )


def evaluate(model: SlowFast, batches: Iterable[Batch]) -> EvalResult:
    """Mean cross-entropy, accuracy and predictions in eval mode.

    Raises:
        TrainingError: If there is nothing to evaluate

    """
    was_training = model.training
    model.eval()
    device = model_device(model)
    loss_sum = 0.0
    predictions: list[int] = []
    labels_seen: list[int] = []
    probabilities: list[list[float]] = []
    try:
        with torch.no_grad():
            for slow, fast, labels in batches:
                logits = model(slow.to(device), fast.to(device))
                labels_dev = labels.to(device)
                loss_sum += float(
                    F.cross_entropy(logits, labels_dev, reduction="sum")
                )
                predictions.extend(logits.argmax(dim=1).tolist())
                labels_seen.extend(labels_dev.tolist())
                probabilities.extend(logits.softmax(dim=1).tolist())
    finally:
        model.train(was_training)
    if not labels_seen:
        msg = "cannot evaluate on an empty split"
        raise TrainingError(msg)
    pairs = zip(predictions, labels_seen, strict=True)
    correct = sum(p == y for p, y in pairs)
    return EvalResult(
        loss=loss_sum / len(labels_seen),
        accuracy=correct / len(labels_seen),
        predictions=predictions,
        labels=labels_seen,
        probabilities=probabilities,
    )


def make_loader(
    dataset: Dataset[tuple[torch.Tensor, torch.Tensor, int]],
    batch_size: int,
    *,
    shuffle: bool,
    seed: int = 0,
    workers: int = 0,
) -> DataLoader[tuple[torch.Tensor, torch.Tensor, int]]:
    """Batch loader; shuffling order is fixed by ``seed``."""
    generator = torch.Generator()
    generator.manual_seed(seed)
    return DataLoader(
        dataset,
        batch_size=batch_size,
        shuffle=shuffle,
        generator=generator,
        num_workers=workers,
    )


def _improves(result: EvalResult, best: EvalResult | None) -> bool:
    if best is None:
        return True
    if result.accuracy != best.accuracy:
        return result.accuracy > best.accuracy
    return result.loss < best.loss


def fit(  # noqa: PLR0913
    model: SlowFast,
    train_set: Dataset[tuple[torch.Tensor, torch.Tensor, int]],
    val_set: Dataset[tuple[torch.Tensor, torch.Tensor, int]],
    schedule: ScheduleConfig,
    optim: OptimConfig,
    checkpoint_dir: Path,
    *,
    seed: int = 0,
    workers: int = 0,
    normalization: Mapping[str, list[float]] | None = None,
    curve_paths: tuple[Path, Path] | None = None,
) -> FitResult:
    """Train for ``optim.max_epochs`` epochs, keeping the best checkpoint.

    The best checkpoint maximizes validation accuracy, ties broken by
    lower validation loss. Epochs past ``schedule.t_max`` stay at
    ``lr_min``. When ``curve_paths`` (iterations, validation) is given,
    both tables are rewritten after every epoch.

    Raises:
        TrainingError: If a split is empty or a loss is not finite
        CheckpointError: If a checkpoint cannot be written

    """
    if len(train_set) == 0:  # type: ignore[arg-type]
        msg = "training split is empty"
        raise TrainingError(msg)
    if len(val_set) == 0:  # type: ignore[arg-type]
        msg = "validation split is empty"
        raise TrainingError(msg)
    seed_everything(seed)
    train_loader = make_loader(
        train_set, optim.batch_size, shuffle=True, seed=seed, workers=workers
    )
    val_loader = make_loader(
        val_set, optim.batch_size, shuffle=False, workers=workers
    )
    optimizer = make_optimizer(model, optim, epoch_lr(0, schedule))
    best_path = checkpoint_dir / "best.pt"
    last_path = checkpoint_dir / "last.pt"
    norm = {k: list(v) for k, v in (normalization or {}).items()}
    curve = TrainingCurve()
    best_result: EvalResult | None = None
    best_checkpoint: Checkpoint | None = None
    n_batches = len(train_loader)

    for epoch in range(optim.max_epochs):
        if hasattr(train_set, "set_epoch"):
            train_set.set_epoch(epoch)
        lr = epoch_lr(epoch, schedule)

        def lr_for_batch(i: int, epoch: int = epoch) -> float:
            return epoch_lr(epoch + i / n_batches, schedule)

        stats = train_epoch(
            model,
            train_loader,
            optimizer,
            lr,
            epoch=epoch,
            start_iteration=curve.iterations,
            lr_for_batch=lr_for_batch if schedule.per_iteration else None,
        )
        curve.points.extend(stats.points)

        result = evaluate(model, val_loader)
        curve.validation.append(
            ValidationPoint(
                epoch=epoch,
                lr=lr,
                loss=result.loss,
                accuracy=result.accuracy,
            )
        )
        if curve_paths is not None:
            curve.write(*curve_paths)
        logger.info(
            "epoch %d/%d lr %.5f loss %.4f top1 error %.3f | "
            "val loss %.4f acc %.3f",
            epoch + 1,
            optim.max_epochs,
            lr,
            stats.mean_loss,
            stats.top1_error,
            result.loss,
            result.accuracy,
        )
        if _improves(result, best_result):
            best_result = result
            best_checkpoint = Checkpoint.of(
                model,
                epoch=epoch,
                normalization=norm,
                metrics={
                    "val_accuracy": result.accuracy,
                    "val_loss": result.loss,
                },
            )
            save_checkpoint(best_path, best_checkpoint)

    if best_checkpoint is None:
        msg = f"max_epochs must be at least 1, got {optim.max_epochs}"
        raise TrainingError(msg)
    last = curve.validation[-1]
    save_checkpoint(
        last_path,
        Checkpoint.of(
            model,
            epoch=last.epoch,
            normalization=norm,
            metrics={"val_accuracy": last.accuracy, "val_loss": last.loss},
        ),
    )
    logger.info(
        "Best validation accuracy %.3f at epoch %d",
        best_checkpoint.metrics["val_accuracy"],
        best_checkpoint.epoch + 1,
    )
    return FitResult(
        best=best_checkpoint,
        best_path=best_path,
        last_path=last_path,
        curve=curve,
    )
