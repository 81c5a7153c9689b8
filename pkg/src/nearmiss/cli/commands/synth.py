"""Synth command implementation."""

from argparse import Namespace

from nearmiss.cli.utils import prepare_run, write_run_info
from nearmiss.core.logger import get_logger
from nearmiss.synth.corpus import generate_corpus
from nearmiss.synth.motion import corpus_detector_auc

logger = get_logger(__name__)


def cmd_synth(args: Namespace) -> None:
    """Handle 'nearmiss synth' command."""
    cfg, layout = prepare_run(args)
    synth = cfg.synth
    corpus = generate_corpus(
        synth.n,
        synth.balance,
        synth.master_seed,
        layout.synth_dir,
        fps=synth.fps,
        resolution=synth.resolution,
        duration_s=synth.duration_s,
        workers=synth.workers,
    )
    near_miss = sum(clip.has_event for clip in corpus.clips)
    extra: dict[str, float | int] = {
        "clips": len(corpus.clips),
        "near_miss": near_miss,
    }
    if args.motion_check and 0 < near_miss < len(corpus.clips):
        auc = corpus_detector_auc(corpus.clips)
        logger.info("Motion-energy detector AUC: %.4f", auc)
        extra["detector_auc"] = auc
    write_run_info(layout, cfg, "synth", extra)
    logger.info(
        "Wrote %d clips (%d near-miss) to %s",
        len(corpus.clips),
        near_miss,
        corpus.manifest,
    )
