"""Prepare command implementation."""

from argparse import Namespace

from nearmiss.cli.utils import load_clips, prepare_run, write_run_info
from nearmiss.core.logger import get_logger
from nearmiss.data.dataset import channel_stats, write_channel_stats
from nearmiss.data.segmentation import segment_corpus, write_segments
from nearmiss.data.splits import (
    SplitName,
    assign_segments,
    make_splits,
    write_splits,
)

logger = get_logger(__name__)


def cmd_prepare(args: Namespace) -> None:
    """Handle 'nearmiss prepare' command.

    Segments every clip, splits clips 6:2:2 (by default) and estimates
    normalization statistics on the training segments.
    """
    cfg, layout = prepare_run(args)
    clips = load_clips(cfg, layout)
    ordered = [clips[clip_id] for clip_id in sorted(clips)]
    segments = segment_corpus(ordered, cfg.data.policy)
    split = make_splits(ordered, cfg.data.ratio, cfg.data.seed)
    grouped = assign_segments(segments, split)
    stats = channel_stats(grouped[SplitName.TRAIN], clips, cfg.model)

    write_segments(layout.segments, segments)
    write_splits(layout.splits, split)
    write_channel_stats(layout.channel_stats, stats)
    sizes = dict(zip(SplitName, split.sizes, strict=True))
    write_run_info(
        layout,
        cfg,
        "prepare",
        {"split_sizes": {name.value: n for name, n in sizes.items()}},
    )
    logger.info(
        "Split %d clips into %s; %d segments",
        len(ordered),
        " / ".join(str(n) for n in split.sizes),
        len(segments),
    )
