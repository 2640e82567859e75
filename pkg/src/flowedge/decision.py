"""Arbitration between the merge, flow-split, and edge records for each RoI,
and synthesis of the final binary foreground image.

The rules fire in a strict order, so exactly one applies to any ledger
state:

1. flow-split RoIs keep their two flow boxes;
2. RoIs that were merged and have edge boxes keep the edge boxes;
3. too many edge boxes (over-segmentation) falls back to the flow box;
4. exactly two edge boxes against one flow box is arbitrated by the area
   ratio of their geometric union to the flow box;
5. otherwise edge boxes win when present; an explicitly empty edge record
   drops the RoI as a background object, and a missing record keeps the
   flow box.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .imaging import PixelBox, box_intersection_area, dilate
from .merging import RefinementLedger

DEFAULT_AREA_RATIO = 0.65
DEFAULT_MAX_EDGE_BOXES = 4
DEFAULT_INTERSECTION_DILATION = 1

SOURCE_FLOW_SPLIT = "flow-split"
SOURCE_EDGE = "edge"
SOURCE_FLOW_MERGED = "flow-merged"
SOURCE_RAW = "raw"


@dataclass
class DecisionConfig:
    area_ratio_threshold: float = DEFAULT_AREA_RATIO
    max_edge_boxes: int = DEFAULT_MAX_EDGE_BOXES
    intersection_dilation: int = DEFAULT_INTERSECTION_DILATION

    def __post_init__(self):
        if not 0.0 < self.area_ratio_threshold <= 1.0:
            raise ValueError("area_ratio_threshold must be in (0, 1]")
        if self.max_edge_boxes < 2:
            raise ValueError("max_edge_boxes must be >= 2")
        if self.intersection_dilation < 0:
            raise ValueError("intersection_dilation must be >= 0")


@dataclass(frozen=True)
class TaggedBox:
    box: PixelBox
    source: str


@dataclass
class FrameDetections:
    frame_index: int
    boxes: list[TaggedBox] = field(default_factory=list)


def ratio_area(e_i: PixelBox, e_j: PixelBox, f_k: PixelBox) -> float:
    """Geometric union area of the two edge boxes over the flow box area."""
    union = e_i.area() + e_j.area() - box_intersection_area(e_i, e_j)
    return union / f_k.area()


def decide_roi(
    roi_id: int,
    ledger: RefinementLedger,
    flow_box: PixelBox,
    cfg: DecisionConfig,
) -> tuple[list[PixelBox], str]:
    """Boxes to keep for one RoI, plus the source tag of the rule that fired."""
    split = ledger.split_flow.get(roi_id)
    if split is not None:
        return [split[0], split[1]], SOURCE_FLOW_SPLIT

    was_merged = roi_id in ledger.merged
    flow_source = SOURCE_FLOW_MERGED if was_merged else SOURCE_RAW
    edge_boxes = ledger.edge_boxes.get(roi_id)

    if was_merged and edge_boxes:
        return list(edge_boxes), SOURCE_EDGE
    if edge_boxes is not None and len(edge_boxes) >= cfg.max_edge_boxes:
        return [flow_box], flow_source
    if edge_boxes is not None and len(edge_boxes) == 2:
        if ratio_area(edge_boxes[0], edge_boxes[1], flow_box) <= cfg.area_ratio_threshold:
            return [flow_box], flow_source
        return list(edge_boxes), SOURCE_EDGE
    if edge_boxes:
        return list(edge_boxes), SOURCE_EDGE
    if edge_boxes is not None:
        # edge analysis found nothing: the RoI was a background object
        return [], flow_source
    return [flow_box], flow_source


def compose_final_mask(
    detections: FrameDetections,
    dims: tuple[int, int],
    cfg: DecisionConfig,
) -> np.ndarray:
    """Rasterize kept boxes into the final binary image.

    Boxes are xor-ed into a black canvas, so regions covered by an even
    number of boxes stay black; every pairwise box intersection, grown by
    ``intersection_dilation`` pixels in all directions, is then forced
    black so touching objects stay separable.
    """
    h, w = dims
    mask = np.zeros((h, w), dtype=bool)
    boxes = [tb.box for tb in detections.boxes]
    for box in boxes:
        x0 = max(0, box.x)
        y0 = max(0, box.y)
        x1 = min(w, box.x2)
        y1 = min(h, box.y2)
        if x0 < x1 and y0 < y1:
            mask[y0:y1, x0:x1] ^= True

    inter = np.zeros((h, w), dtype=bool)
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            a, b = boxes[i], boxes[j]
            x0 = max(a.x, b.x, 0)
            y0 = max(a.y, b.y, 0)
            x1 = min(a.x2, b.x2, w)
            y1 = min(a.y2, b.y2, h)
            if x0 < x1 and y0 < y1:
                inter[y0:y1, x0:x1] = True
    if inter.any():
        mask &= ~dilate(inter, cfg.intersection_dilation)
    return mask
