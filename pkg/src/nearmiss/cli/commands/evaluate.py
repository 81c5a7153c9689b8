"""Eval command implementation."""

from argparse import Namespace
from pathlib import Path

from nearmiss.cli.utils import (
    load_prepared,
    make_dataset,
    prepare_run,
    require,
    select_device,
    write_run_info,
)
from nearmiss.core.labels import Label
from nearmiss.core.logger import get_logger
from nearmiss.core.records import write_jsonl
from nearmiss.data.dataset import ChannelStats
from nearmiss.data.splits import SplitName
from nearmiss.metrics.report import (
    improvement_table,
    load_baselines,
    write_report,
)
from nearmiss.metrics.scores import compute_metrics, confusion
from nearmiss.model.checkpoint import load_checkpoint, restore_model
from nearmiss.train.loop import evaluate, make_loader

logger = get_logger(__name__)


def cmd_eval(args: Namespace) -> None:
    """Handle 'nearmiss eval' command."""
    cfg, layout = prepare_run(args)
    checkpoint_path = require(
        Path(args.checkpoint) if args.checkpoint else layout.best_checkpoint,
        "run 'nearmiss train' first",
    )
    clips, grouped, stats = load_prepared(cfg, layout)
    checkpoint = load_checkpoint(checkpoint_path, expected=cfg.model)
    if checkpoint.normalization:
        stats = ChannelStats.from_dict(checkpoint.normalization)
    model = restore_model(checkpoint)
    if args.slow_only:
        model.ablate_fast = True
    model.to(select_device())

    split = SplitName(args.split)
    segments = grouped[split]
    dataset = make_dataset(cfg, segments, clips, stats, train=False)
    result = evaluate(
        model,
        make_loader(
            dataset,
            cfg.train.optim.batch_size,
            shuffle=False,
            workers=cfg.data.workers,
        ),
    )
    report = compute_metrics(confusion(result.predictions, result.labels))
    table = improvement_table(report, load_baselines())

    out_dir = layout.eval_dir / (
        f"{split.value}_slow_only" if model.ablate_fast else split.value
    )
    _, text_path = write_report(
        out_dir,
        report,
        table,
        extra={
            "checkpoint": checkpoint_path.name,
            "checkpoint_epoch": checkpoint.epoch,
            "split": split.value,
            "samples": len(result.labels),
            "loss": result.loss,
            "slow_only": model.ablate_fast,
        },
    )
    write_jsonl(
        out_dir / "predictions.jsonl",
        (
            {
                "segment_id": segment.segment_id,
                "label": segment.label.value,
                "predicted": Label.from_index(predicted).value,
                "probabilities": probabilities,
            }
            for segment, predicted, probabilities in zip(
                segments,
                result.predictions,
                result.probabilities,
                strict=True,
            )
        ),
    )
    write_run_info(
        layout, cfg, "eval", {"split": split.value, "report": str(out_dir)}
    )
    logger.info("%s", text_path.read_text(encoding="utf-8").rstrip())
