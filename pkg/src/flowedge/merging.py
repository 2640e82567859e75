"""Fragment merging: join blob pairs that are close together (C1), share
flow-magnitude range (C2), and move in roughly the same direction (C3).

Merging iterates to a fixpoint so that objects fragmented into three or more
pieces collapse into one region; the scan order over candidate pairs is
fixed, which makes the pass deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .flow import BlobFlowStats, angle_diff, blob_flow_stats
from .imaging import Blob, PixelBox, blob_distance, box_union, sort_row_major, tight_box

DEFAULT_DISTANCE = 7.0
DEFAULT_ANGLE_TOLERANCE = math.pi / 2.0


@dataclass
class MergeConfig:
    t_m: float = DEFAULT_DISTANCE
    a_t: float = DEFAULT_ANGLE_TOLERANCE

    def __post_init__(self):
        if self.t_m < 0:
            raise ValueError("t_m must be >= 0")
        if not 0.0 <= self.a_t <= math.pi:
            raise ValueError("a_t must be in [0, pi]")


@dataclass
class RefinementLedger:
    """Per-frame record of what each refinement stage did to each RoI.

    * ``merged``: RoI id -> the set of original blob ids it absorbed;
    * ``split_flow``: RoI id -> the two boxes produced by flow separation;
    * ``edge_boxes``: RoI id -> boxes from edge analysis (an empty list means
      the edge stage rejected the RoI as a background object).
    """

    merged: dict[int, set[int]] = field(default_factory=dict)
    split_flow: dict[int, tuple[PixelBox, PixelBox]] = field(default_factory=dict)
    edge_boxes: dict[int, list[PixelBox]] = field(default_factory=dict)


def check_c1(a: Blob, b: Blob, cfg: MergeConfig) -> bool:
    """Proximity: minimum pixel distance within t_m (inclusive)."""
    return blob_distance(a, b) <= cfg.t_m


def check_c2(sa: BlobFlowStats, sb: BlobFlowStats) -> bool:
    """Magnitude-interval overlap: the closed mean+-std domains intersect."""
    return sa.dom_lo <= sb.dom_hi and sb.dom_lo <= sa.dom_hi


def check_c3(sa: BlobFlowStats, sb: BlobFlowStats, cfg: MergeConfig) -> bool:
    """Direction agreement: center angles within a_t of each other."""
    return angle_diff(sa.center_angle, sb.center_angle) <= cfg.a_t


def merge_pass(
    blobs: list[Blob],
    field: np.ndarray,
    cfg: MergeConfig,
    ledger: RefinementLedger,
) -> list[Blob]:
    """Merge every blob pair satisfying C1, C2 and C3 until none qualifies.

    A merged blob takes the union of both pixel sets; its bbox is the
    smallest box framing both parts. Merges are recorded in
    ``ledger.merged`` keyed by the surviving blob id, with values flattened
    to the original input blob ids.
    """
    work = list(blobs)
    stats = {b.id: blob_flow_stats(field, b) for b in work}
    sources = {b.id: {b.id} for b in work}
    next_id = max((b.id for b in work), default=-1) + 1

    merged_something = True
    while merged_something:
        merged_something = False
        work.sort(key=lambda b: b.id)
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                a, b = work[i], work[j]
                if not (
                    check_c1(a, b, cfg)
                    and check_c2(stats[a.id], stats[b.id])
                    and check_c3(stats[a.id], stats[b.id], cfg)
                ):
                    continue
                pixels = sort_row_major(
                    np.unique(np.concatenate([a.pixels, b.pixels]), axis=0)
                )
                union = Blob(next_id, pixels, box_union(a.bbox, b.bbox))
                next_id += 1
                stats[union.id] = blob_flow_stats(field, union)
                sources[union.id] = sources.pop(a.id) | sources.pop(b.id)
                ledger.merged.pop(a.id, None)
                ledger.merged.pop(b.id, None)
                ledger.merged[union.id] = set(sources[union.id])
                del work[j]
                del work[i]
                work.append(union)
                merged_something = True
                break
            if merged_something:
                break
    work.sort(key=lambda b: b.id)
    return work
