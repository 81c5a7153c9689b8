"""Explain command implementation."""

import statistics
from argparse import Namespace
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from nearmiss.cli.utils import (
    load_prepared,
    make_dataset,
    manifest_path,
    prepare_run,
    require,
    select_device,
    write_run_info,
)
from nearmiss.core.config import ExplainConfig, RunConfig
from nearmiss.core.labels import Label
from nearmiss.core.logger import get_logger
from nearmiss.core.records import write_json, write_jsonl
from nearmiss.data.augment import CropGeometry
from nearmiss.data.clips import ClipRecord
from nearmiss.data.dataset import ChannelStats
from nearmiss.data.decoder import decoder_for
from nearmiss.data.sampling import FramePair
from nearmiss.data.splits import SplitName
from nearmiss.explain.gradcam import (
    HeatmapStack,
    grad_cam,
    localization_hit_rate,
    peak_hits_box,
    stack_entropy,
)
from nearmiss.explain.overlay import write_overlays
from nearmiss.explain.saliency import compare_maps, load_saliency
from nearmiss.model.checkpoint import load_checkpoint, restore_model
from nearmiss.model.config import Pathway
from nearmiss.synth.corpus import read_ground_truth, truth_path

logger = get_logger(__name__)

SALIENCY_SUFFIXES = (".png", ".jpg", ".txt", ".csv")


@dataclass
class _Findings:
    hits: list[bool] = field(default_factory=list)
    entropy: dict[str, list[float]] = field(
        default_factory=lambda: {label.value: [] for label in Label}
    )
    overlap: list[dict[str, Any]] = field(default_factory=list)


def _saliency_file(directory: Path, clip_id: str) -> Path | None:
    for suffix in SALIENCY_SUFFIXES:
        candidate = directory / f"{clip_id}{suffix}"
        if candidate.exists():
            return candidate
    return None


def _write_stacks(
    seg_dir: Path,
    pair: FramePair,
    stacks: dict[Pathway, HeatmapStack],
    settings: ExplainConfig,
    frames: list[int],
) -> None:
    seg_dir.mkdir(parents=True, exist_ok=True)
    for pathway, stack in stacks.items():
        np.save(seg_dir / f"{pathway.value}_heatmaps.npy", stack.maps)
        volume = (
            pair.slow_frames if pathway is Pathway.SLOW else pair.fast_frames
        )
        selected = [f for f in frames if f < len(stack)]
        write_overlays(
            seg_dir,
            volume,
            stack,
            opacity=settings.opacity,
            selected=selected or None,
        )


def _crop_geometry(
    cfg: RunConfig, clip: ClipRecord, frame_index: int
) -> CropGeometry:
    source = decoder_for(clip).read(clip, [frame_index])
    return CropGeometry.of(
        source.shape[1],
        source.shape[2],
        cfg.data.short_side_range[0],
        cfg.data.crop_size,
    )


def _median_of(
    rows: list[dict[str, Any]], label: Label, key: str
) -> float | None:
    values = [row[key] for row in rows if row["label"] == label.value]
    return statistics.median(values) if values else None


def _summary(
    findings: _Findings, settings: ExplainConfig, n_segments: int
) -> dict[str, Any]:
    summary: dict[str, Any] = {
        "pathway": settings.pathway.value,
        "target": settings.target.value,
        "segments": n_segments,
        "segments_by_label": {
            label: len(values) for label, values in findings.entropy.items()
        },
        "median_entropy": {
            label: statistics.median(values) if values else None
            for label, values in findings.entropy.items()
        },
    }
    if findings.hits:
        summary["localization_hit_rate"] = localization_hit_rate(
            findings.hits
        )
        summary["localization_clips"] = len(findings.hits)
    if findings.overlap:
        summary["median_pearson_cc"] = {
            label.value: _median_of(findings.overlap, label, "pearson_cc")
            for label in Label
        }
    return summary


def cmd_explain(args: Namespace) -> None:
    """Handle 'nearmiss explain' command.

    Computes slow and fast heatmaps for test segments of both classes and
    renders their overlays. Near-miss segments are scored for
    localization against synthetic ground truth. When gaze maps are
    configured, every segment is also compared with its clip's map, cut
    to the same crop as the model input.
    """
    cfg, layout = prepare_run(args)
    settings = cfg.explain
    checkpoint_path = require(
        Path(args.checkpoint) if args.checkpoint else layout.best_checkpoint,
        "run 'nearmiss train' first",
    )
    clips, grouped, stats = load_prepared(cfg, layout)
    checkpoint = load_checkpoint(checkpoint_path, expected=cfg.model)
    if checkpoint.normalization:
        stats = ChannelStats.from_dict(checkpoint.normalization)
    model = restore_model(checkpoint).to(select_device())

    segments = grouped[SplitName.TEST][: settings.max_clips * 2]
    dataset = make_dataset(cfg, segments, clips, stats, train=False)
    from_corpus = manifest_path(cfg, layout).parent
    frames = (
        [int(f) for f in args.frames.split(",")]
        if args.frames
        else list(settings.frames)
    )
    saliency_dir = (
        Path(settings.saliency_dir) if settings.saliency_dir else None
    )

    findings = _Findings()
    for index, segment in enumerate(segments):
        clip = clips[segment.clip_id]
        pair = dataset.frame_pair(index)
        slow, fast, _ = dataset[index]
        stacks = {
            pathway: grad_cam(
                model,
                slow,
                fast,
                settings.target,
                layer=settings.layer
                if settings.layer and pathway is settings.pathway
                else None,
                pathway=pathway,
            )
            for pathway in Pathway
        }
        focus = stacks[settings.pathway]
        findings.entropy[segment.label.value].append(stack_entropy(focus))
        seg_dir = layout.explain_dir / segment.segment_id.replace(":", "_")
        _write_stacks(seg_dir, pair, stacks, settings, frames)
        geometry = _crop_geometry(cfg, clip, pair.fast_indices[0])

        # safe-driving segments have no intruder box to hit
        truth_file = truth_path(from_corpus, clip.clip_id)
        if (
            segment.label is Label.NEAR_MISS
            and truth_file.exists()
            and settings.pathway is Pathway.FAST
        ):
            truth = read_ground_truth(truth_file)
            findings.hits.append(
                peak_hits_box(focus, pair.fast_indices, truth, geometry)
            )

        gaze = (
            _saliency_file(saliency_dir, clip.clip_id)
            if saliency_dir is not None
            else None
        )
        if gaze is not None:
            saliency = load_saliency(gaze)
            findings.overlap.extend(
                {
                    "segment_id": segment.segment_id,
                    "label": segment.label.value,
                    **compare_maps(
                        focus.maps[t],
                        saliency,
                        threshold=settings.threshold,
                        pathway=settings.pathway,
                        frame=t,
                        geometry=geometry,
                    ).to_dict(),
                }
                for t in range(len(focus))
            )

    summary = {
        "checkpoint": checkpoint_path.name,
        **_summary(findings, settings, len(segments)),
    }
    if findings.hits:
        logger.info(
            "Heatmap peak inside the intruder box in %d of %d clips",
            sum(findings.hits),
            len(findings.hits),
        )
    if findings.overlap:
        write_jsonl(layout.explain_dir / "overlap.jsonl", findings.overlap)
    write_json(layout.explain_dir / "summary.json", summary)
    write_run_info(layout, cfg, "explain", {"summary": summary})
