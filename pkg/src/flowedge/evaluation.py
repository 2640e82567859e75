"""Detection and tracking metrics: IoU-matched precision/recall and a
CLEAR-MOT evaluator for externally supplied track files.

Matching is greedy by descending IoU, which is deterministic and adequate at
this scale; pairs below the IoU floor are never matched. The MOT evaluator
keeps frame-to-frame correspondences sticky: an object stays bound to its
track while their IoU holds, and changing tracks counts as an id switch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .imaging import PixelBox, box_iou

DEFAULT_IOU_MIN = 0.30


@dataclass(frozen=True)
class GroundTruthEntry:
    frame_index: int
    object_id: int
    box: PixelBox
    class_label: str = ""


@dataclass(frozen=True)
class DetectionReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "DetectionReport":
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        return cls(tp, fp, fn, precision, recall)

    def as_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
        }


@dataclass(frozen=True)
class MotReport:
    mota: float
    motp: float
    misses: int
    false_positives: int
    id_switches: int
    total_gt: int
    matches: int

    def as_dict(self) -> dict:
        return {
            "mota": self.mota,
            "motp": self.motp,
            "misses": self.misses,
            "false_positives": self.false_positives,
            "id_switches": self.id_switches,
            "total_gt": self.total_gt,
            "matches": self.matches,
        }


def match_detections(
    dets: list[PixelBox],
    gts: list[PixelBox],
    iou_min: float = DEFAULT_IOU_MIN,
) -> list[tuple[int, int, float]]:
    """Greedy one-to-one matching by descending IoU.

    Returns (det index, gt index, iou) triples; each detection and each
    ground truth is used at most once and never below ``iou_min``.
    """
    if not 0.0 < iou_min <= 1.0:
        raise ValueError("iou_min must be in (0, 1]")
    candidates = []
    for di, det in enumerate(dets):
        for gi, gt in enumerate(gts):
            iou = box_iou(det, gt)
            if iou >= iou_min:
                candidates.append((-iou, di, gi))
    candidates.sort()
    used_det: set[int] = set()
    used_gt: set[int] = set()
    matches = []
    for neg_iou, di, gi in candidates:
        if di in used_det or gi in used_gt:
            continue
        used_det.add(di)
        used_gt.add(gi)
        matches.append((di, gi, -neg_iou))
    return matches


def detection_metrics(per_frame: list[tuple[int, int, int]]) -> DetectionReport:
    """Aggregate (num detections, num ground truths, num matches) triples."""
    tp = sum(m for _, _, m in per_frame)
    fp = sum(d - m for d, _, m in per_frame)
    fn = sum(g - m for _, g, m in per_frame)
    return DetectionReport.from_counts(tp, fp, fn)


def evaluate_detections(
    dets_by_frame: dict[int, list[PixelBox]],
    gts_by_frame: dict[int, list[PixelBox]],
    iou_min: float = DEFAULT_IOU_MIN,
) -> DetectionReport:
    """Match per annotated frame and aggregate into one report.

    Only frames that carry ground truth count; detector output on frames
    without annotations is not penalized.
    """
    per_frame = []
    for frame, gts in sorted(gts_by_frame.items()):
        dets = dets_by_frame.get(frame, [])
        matches = match_detections(dets, gts, iou_min)
        per_frame.append((len(dets), len(gts), len(matches)))
    return detection_metrics(per_frame)


def clear_mot(
    tracks_by_frame: dict[int, list[tuple[int, PixelBox]]],
    gts_by_frame: dict[int, list[tuple[int, PixelBox]]],
    iou_min: float = DEFAULT_IOU_MIN,
) -> MotReport:
    """CLEAR-MOT over per-frame (id, box) records.

    MOTA = 1 - (misses + false positives + switches) / total ground truths;
    MOTP is the mean IoU of matched pairs. Correspondences persist from the
    previous frame while their IoU stays above the floor; a ground truth
    re-binding to a different track id than its last known one counts as one
    id switch.
    """
    frames = sorted(set(gts_by_frame) | set(tracks_by_frame))
    corr: dict[int, int] = {}
    last_track: dict[int, int] = {}
    misses = 0
    false_positives = 0
    switches = 0
    total_gt = 0
    iou_sum = 0.0
    match_count = 0

    for frame in frames:
        gts = gts_by_frame.get(frame, [])
        trs = tracks_by_frame.get(frame, [])
        total_gt += len(gts)
        gt_boxes = dict(gts)
        tr_boxes = dict(trs)

        frame_pairs: dict[int, int] = {}
        # keep yesterday's correspondences that still overlap today
        for gt_id, tr_id in corr.items():
            if gt_id in gt_boxes and tr_id in tr_boxes:
                iou = box_iou(gt_boxes[gt_id], tr_boxes[tr_id])
                if iou >= iou_min:
                    frame_pairs[gt_id] = tr_id
                    iou_sum += iou
                    match_count += 1

        free_gts = [g for g in sorted(gt_boxes) if g not in frame_pairs]
        taken = set(frame_pairs.values())
        free_trs = [t for t in sorted(tr_boxes) if t not in taken]
        matches = match_detections(
            [tr_boxes[t] for t in free_trs],
            [gt_boxes[g] for g in free_gts],
            iou_min,
        )
        for di, gi, iou in matches:
            gt_id = free_gts[gi]
            tr_id = free_trs[di]
            frame_pairs[gt_id] = tr_id
            iou_sum += iou
            match_count += 1
            if gt_id in last_track and last_track[gt_id] != tr_id:
                switches += 1

        for gt_id, tr_id in frame_pairs.items():
            last_track[gt_id] = tr_id
        misses += len(gt_boxes) - len(frame_pairs)
        false_positives += len(tr_boxes) - len(frame_pairs)
        corr = frame_pairs

    mota = 1.0 - (misses + false_positives + switches) / total_gt if total_gt else 0.0
    motp = iou_sum / match_count if match_count else 0.0
    return MotReport(mota, motp, misses, false_positives, switches, total_gt, match_count)


def write_report(prefix, report) -> None:
    """Persist a report as flat key=value text plus a JSON twin."""
    data = report.as_dict()
    with open(f"{prefix}.txt", "w") as fh:
        for key, value in data.items():
            fh.write(f"{key} = {value}\n")
    with open(f"{prefix}.json", "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def format_report(report) -> str:
    return "\n".join(f"{key} = {value}" for key, value in report.as_dict().items())
