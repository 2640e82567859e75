"""End-to-end orchestration: config handling, frame iteration, the
refinement stages in order, and output artifacts.

Per frame: update the background model, obtain the raw foreground mask
(built-in subtractor or ingested), extract blobs, compute flow against the
previous frame, merge, split, run edge analysis, decide, and compose the
final binary image. The first frame and every frame inside the warmup window
skip refinement and emit raw boxes, so the subtractor and the background
image have time to stabilize.

Outputs under the configured directory: ``refined/%06d.pgm`` masks,
``raw_boxes.csv`` (``frame,blob_id,x,y,w,h``), ``refined_boxes.csv``
(``frame,source,x,y,w,h``), and — when ground truth is supplied — detection
reports for both the raw and the refined boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import frameio
from .background import BackgroundModel, SampleSubtractor, ingest_mask
from .decision import DecisionConfig, FrameDetections, TaggedBox, compose_final_mask, decide_roi
from .decision import SOURCE_RAW
from .edges import EdgeConfig, edge_pass
from .evaluation import (
    DetectionReport,
    clear_mot,
    evaluate_detections,
    write_report,
)
from .flow import compute_flow
from .frameio import DataFormatError
from .imaging import connected_components, to_gray
from .merging import MergeConfig, RefinementLedger, merge_pass
from .splitting import SplitConfig, split_pass


@dataclass
class PipelineConfig:
    """Every tunable of the pipeline, addressable by dotted key."""

    frames_dir: str = ""
    masks_dir: str = ""
    output_dir: str = "out"
    gt_path: str = ""
    min_area: int = 50
    warmup_frames: int = 30
    bg_alpha: float = 0.01
    bg_samples: int = 20
    bg_match_radius: int = 20
    bg_min_matches: int = 2
    bg_update_prob: float = 1.0 / 16.0
    bg_seed: int = 0
    flow_patch: int = 8
    flow_search_radius: int = 16
    merge_t_m: float = 7.0
    merge_a_t: float = math.pi / 2.0
    split_t_int: float = 0.40
    split_seed: int = 0
    split_max_iter: int = 100
    edges_sigma: float = 1.0 / 3.0
    edges_min_group_size: int = 10
    edges_tolerant: bool = False
    decision_area_ratio: float = 0.65
    decision_max_edge_boxes: int = 4
    decision_dilation: int = 1
    eval_iou_min: float = 0.30

    def merge_config(self) -> MergeConfig:
        return MergeConfig(t_m=self.merge_t_m, a_t=self.merge_a_t)

    def split_config(self) -> SplitConfig:
        return SplitConfig(
            t_int=self.split_t_int, seed=self.split_seed, max_iter=self.split_max_iter
        )

    def edge_config(self) -> EdgeConfig:
        return EdgeConfig(
            sigma=self.edges_sigma,
            min_group_size=self.edges_min_group_size,
            tolerant=self.edges_tolerant,
        )

    def decision_config(self) -> DecisionConfig:
        return DecisionConfig(
            area_ratio_threshold=self.decision_area_ratio,
            max_edge_boxes=self.decision_max_edge_boxes,
            intersection_dilation=self.decision_dilation,
        )

    def validate(self) -> None:
        if self.min_area < 0:
            raise ValueError("blobs.min_area must be >= 0")
        if self.warmup_frames < 0:
            raise ValueError("pipeline.warmup_frames must be >= 0")
        if self.flow_patch < 1:
            raise ValueError("flow.patch must be >= 1")
        if self.flow_search_radius < 1:
            raise ValueError("flow.search_radius must be >= 1")
        if not 0.0 < self.eval_iou_min <= 1.0:
            raise ValueError("eval.iou_min must be in (0, 1]")
        self.merge_config()
        self.split_config()
        self.edge_config()
        self.decision_config()
        BackgroundModel(self.bg_alpha)
        SampleSubtractor(
            samples=self.bg_samples,
            match_radius=self.bg_match_radius,
            min_matches=self.bg_min_matches,
            update_prob=self.bg_update_prob,
            seed=self.bg_seed,
        )


CONFIG_KEYS: dict[str, tuple[str, type]] = {
    "io.frames_dir": ("frames_dir", str),
    "io.masks_dir": ("masks_dir", str),
    "io.output_dir": ("output_dir", str),
    "io.gt_path": ("gt_path", str),
    "blobs.min_area": ("min_area", int),
    "pipeline.warmup_frames": ("warmup_frames", int),
    "bg.alpha": ("bg_alpha", float),
    "bg.samples": ("bg_samples", int),
    "bg.match_radius": ("bg_match_radius", int),
    "bg.min_matches": ("bg_min_matches", int),
    "bg.update_prob": ("bg_update_prob", float),
    "bg.seed": ("bg_seed", int),
    "flow.patch": ("flow_patch", int),
    "flow.search_radius": ("flow_search_radius", int),
    "merge.t_m": ("merge_t_m", float),
    "merge.a_t": ("merge_a_t", float),
    "split.t_int": ("split_t_int", float),
    "split.seed": ("split_seed", int),
    "split.max_iter": ("split_max_iter", int),
    "edges.sigma": ("edges_sigma", float),
    "edges.min_group_size": ("edges_min_group_size", int),
    "edges.tolerant": ("edges_tolerant", bool),
    "decision.area_ratio": ("decision_area_ratio", float),
    "decision.max_edge_boxes": ("decision_max_edge_boxes", int),
    "decision.dilation": ("decision_dilation", int),
    "eval.iou_min": ("eval_iou_min", float),
}

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def set_config_key(cfg: PipelineConfig, key: str, value: str) -> None:
    """Apply one dotted-key assignment; unknown keys are rejected."""
    if key not in CONFIG_KEYS:
        raise DataFormatError(f"unknown config key {key!r}")
    attr, typ = CONFIG_KEYS[key]
    text = value.strip()
    try:
        if typ is bool:
            low = text.lower()
            if low in _TRUE:
                parsed = True
            elif low in _FALSE:
                parsed = False
            else:
                raise ValueError(text)
        elif typ is int:
            parsed = int(text)
        elif typ is float:
            parsed = float(text)
        else:
            parsed = text
    except ValueError:
        raise DataFormatError(f"config key {key}: cannot parse {value!r} as {typ.__name__}") from None
    setattr(cfg, attr, parsed)


def load_config_file(cfg: PipelineConfig, path) -> None:
    """Read ``key = value`` lines ('#' starts a comment) into ``cfg``."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            set_config_key(cfg, key, value)
        except DataFormatError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from None


def dump_config(cfg: PipelineConfig) -> str:
    lines = []
    for key in CONFIG_KEYS:
        attr, typ = CONFIG_KEYS[key]
        value = getattr(cfg, attr)
        if typ is bool:
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def refine_frame(
    blobs,
    field: np.ndarray,
    gray: np.ndarray,
    bg_gray: np.ndarray,
    cfg: PipelineConfig,
) -> tuple[list[TaggedBox], RefinementLedger]:
    """Run merge, split, edge, and decision for one frame's blobs."""
    ledger = RefinementLedger()
    merge_cfg = cfg.merge_config()
    rois = merge_pass(blobs, field, merge_cfg, ledger)
    split_cfg = cfg.split_config()
    edge_cfg = cfg.edge_config()
    decision_cfg = cfg.decision_config()
    tagged: list[TaggedBox] = []
    for roi in rois:
        split_pass(roi, field, split_cfg, merge_cfg, ledger)
        edge_pass(roi, gray, bg_gray, edge_cfg, ledger)
        boxes, source = decide_roi(roi.id, ledger, roi.bbox, decision_cfg)
        tagged.extend(TaggedBox(box, source) for box in boxes)
    return tagged, ledger


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Process a frame directory end to end; returns a run summary."""
    cfg.validate()
    frame_files = frameio.list_frames(cfg.frames_dir)
    if not frame_files:
        raise FileNotFoundError(f"no frames found in {cfg.frames_dir}")

    out_dir = Path(cfg.output_dir)
    refined_dir = out_dir / "refined"
    refined_dir.mkdir(parents=True, exist_ok=True)

    model = BackgroundModel(cfg.bg_alpha)
    subtractor = None
    if not cfg.masks_dir:
        subtractor = SampleSubtractor(
            samples=cfg.bg_samples,
            match_radius=cfg.bg_match_radius,
            min_matches=cfg.bg_min_matches,
            update_prob=cfg.bg_update_prob,
            seed=cfg.bg_seed,
        )

    dims = None
    prev_gray = None
    raw_rows = []
    refined_rows = []
    raw_by_frame: dict[int, list] = {}
    refined_by_frame: dict[int, list] = {}

    for position, (index, path) in enumerate(frame_files):
        color = frameio.read_frame(path)
        if dims is None:
            dims = color.shape[:2]
        elif color.shape[:2] != dims:
            raise DataFormatError(
                f"frame {path} has size {color.shape[1]}x{color.shape[0]}, "
                f"expected {dims[1]}x{dims[0]}"
            )
        gray = to_gray(color)
        model.accumulate(color)

        if subtractor is not None:
            mask = subtractor.segment(gray)
        else:
            mask_path = Path(cfg.masks_dir) / f"{index:06d}.pgm"
            mask = ingest_mask(mask_path, expected_shape=dims)

        blobs = connected_components(mask, cfg.min_area)
        raw_by_frame[index] = [b.bbox for b in blobs]
        raw_rows.extend((index, b.id, b.bbox) for b in blobs)

        if prev_gray is None or position < cfg.warmup_frames:
            tagged = [TaggedBox(b.bbox, SOURCE_RAW) for b in blobs]
        else:
            field = compute_flow(
                prev_gray, gray, patch=cfg.flow_patch, search_radius=cfg.flow_search_radius
            )
            bg_gray = to_gray(model.snapshot())
            tagged, _ = refine_frame(blobs, field, gray, bg_gray, cfg)

        detections = FrameDetections(index, tagged)
        final_mask = compose_final_mask(detections, dims, cfg.decision_config())
        frameio.write_mask(refined_dir / f"{index:06d}.pgm", final_mask)
        refined_by_frame[index] = [tb.box for tb in tagged]
        refined_rows.extend((index, tb.source, tb.box) for tb in tagged)
        prev_gray = gray

    frameio.write_blob_boxes_csv(out_dir / "raw_boxes.csv", raw_rows)
    frameio.write_detection_csv(out_dir / "refined_boxes.csv", refined_rows)

    summary = {
        "frames": len(frame_files),
        "raw_boxes": len(raw_rows),
        "refined_boxes": len(refined_rows),
        "output_dir": str(out_dir),
    }
    if cfg.gt_path:
        gt_boxes = frameio.read_boxes_csv(cfg.gt_path)
        raw_report = evaluate_detections(raw_by_frame, gt_boxes, cfg.eval_iou_min)
        refined_report = evaluate_detections(refined_by_frame, gt_boxes, cfg.eval_iou_min)
        write_report(out_dir / "report_raw", raw_report)
        write_report(out_dir / "report_refined", refined_report)
        summary["raw_report"] = raw_report
        summary["refined_report"] = refined_report
    return summary


def run_eval(dets_path, gt_path, iou_min: float = 0.30, out_prefix=None) -> DetectionReport:
    """Detection metrics for a detections CSV against a ground-truth CSV."""
    dets = frameio.read_boxes_csv(dets_path)
    gts = frameio.read_boxes_csv(gt_path)
    report = evaluate_detections(dets, gts, iou_min)
    if out_prefix is not None:
        write_report(out_prefix, report)
    return report


def run_mot_eval(tracks_path, gt_path, iou_min: float = 0.30, out_prefix=None):
    """CLEAR-MOT metrics for a track file against a ground-truth file."""
    tracks = frameio.read_annotations_csv(tracks_path)
    gts = frameio.read_annotations_csv(gt_path)
    report = clear_mot(tracks, gts, iou_min)
    if out_prefix is not None:
        write_report(out_prefix, report)
    return report
