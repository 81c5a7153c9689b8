"""Train command implementation."""

from argparse import Namespace

from nearmiss.cli.utils import (
    load_prepared,
    make_dataset,
    prepare_run,
    select_device,
    write_run_info,
)
from nearmiss.core.logger import get_logger
from nearmiss.core.records import write_json
from nearmiss.data.splits import SplitName
from nearmiss.model.flops import model_summary
from nearmiss.model.slowfast import build_slowfast
from nearmiss.train.loop import fit

logger = get_logger(__name__)


def cmd_train(args: Namespace) -> None:
    """Handle 'nearmiss train' command."""
    cfg, layout = prepare_run(args)
    clips, grouped, stats = load_prepared(cfg, layout)
    model = build_slowfast(
        cfg.model, cfg.train.init_seed, input_size=cfg.data.crop_size
    )
    write_json(layout.model_summary, model_summary(model, cfg.data.crop_size))
    model.ablate_fast = cfg.train.slow_only or args.slow_only
    if model.ablate_fast:
        logger.info("Slow-only ablation: fast pathway input is zeroed")
    model.to(select_device())

    result = fit(
        model,
        make_dataset(cfg, grouped[SplitName.TRAIN], clips, stats, train=True),
        make_dataset(
            cfg, grouped[SplitName.VALIDATION], clips, stats, train=False
        ),
        cfg.train.schedule,
        cfg.train.optim,
        layout.checkpoints,
        seed=cfg.train.seed,
        workers=cfg.data.workers,
        normalization=stats.to_dict(),
        curve_paths=(layout.curve, layout.validation_curve),
    )
    write_run_info(
        layout,
        cfg,
        "train",
        {
            "slow_only": model.ablate_fast,
            "best_epoch": result.best.epoch,
            "best_metrics": result.best.metrics,
            "iterations": result.curve.iterations,
        },
    )
