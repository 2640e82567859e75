"""Foreground-blob refinement for fixed-camera video.

Raw background-subtraction masks are noisy building blocks: one object can
fragment into several blobs, close or crossing objects can fuse into one,
and shadows inflate boxes. This package merges fragments whose optical flow
agrees, splits blobs whose flow clusters move in opposite directions,
tightens boxes with background-suppressed edge analysis, and composes the
result into a new binary image suitable for blob-based trackers. It ships a
deterministic synthetic-scene generator and detection / CLEAR-MOT
evaluators.
"""

from .background import BackgroundModel, SampleSubtractor, ingest_mask
from .decision import (
    DecisionConfig,
    FrameDetections,
    TaggedBox,
    compose_final_mask,
    decide_roi,
    ratio_area,
)
from .edges import (
    EdgeConfig,
    EdgeGroup,
    canny,
    canny_thresholds,
    edge_pass,
    foreground_edges,
    group_edges,
)
from .evaluation import (
    DetectionReport,
    GroundTruthEntry,
    MotReport,
    clear_mot,
    detection_metrics,
    evaluate_detections,
    match_detections,
)
from .flow import BlobFlowStats, angle_diff, blob_flow_stats, compute_flow
from .imaging import (
    Blob,
    PixelBox,
    blob_distance,
    box_iou,
    box_union,
    connected_components,
    dilate,
    to_gray,
)
from .merging import MergeConfig, RefinementLedger, check_c1, check_c2, check_c3, merge_pass
from .pipeline import PipelineConfig, run_eval, run_mot_eval, run_pipeline
from .splitting import SplitConfig, kmeans_flow, ratio_int, split_pass
from .synth import ActorSpec, PropSpec, SceneScript, preset, render

__version__ = "0.1.0"

__all__ = [
    "ActorSpec",
    "BackgroundModel",
    "Blob",
    "BlobFlowStats",
    "DecisionConfig",
    "DetectionReport",
    "EdgeConfig",
    "EdgeGroup",
    "FrameDetections",
    "GroundTruthEntry",
    "MergeConfig",
    "MotReport",
    "PixelBox",
    "PipelineConfig",
    "PropSpec",
    "RefinementLedger",
    "SampleSubtractor",
    "SceneScript",
    "SplitConfig",
    "TaggedBox",
    "angle_diff",
    "blob_distance",
    "blob_flow_stats",
    "box_iou",
    "box_union",
    "canny",
    "canny_thresholds",
    "clear_mot",
    "compose_final_mask",
    "compute_flow",
    "connected_components",
    "decide_roi",
    "detection_metrics",
    "dilate",
    "edge_pass",
    "evaluate_detections",
    "foreground_edges",
    "group_edges",
    "ingest_mask",
    "kmeans_flow",
    "match_detections",
    "merge_pass",
    "preset",
    "ratio_area",
    "ratio_int",
    "render",
    "run_eval",
    "run_mot_eval",
    "run_pipeline",
    "split_pass",
    "to_gray",
    "check_c1",
    "check_c2",
    "check_c3",
]
