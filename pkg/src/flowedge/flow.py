"""Dense optical flow by exhaustive block matching, plus per-blob flow
statistics (magnitude interval and center angle) used by the merge and split
stages.

The frame is tiled into ``patch`` x ``patch`` blocks. Each block of the
current frame is matched against the previous frame over all displacements
within ``search_radius`` (Chebyshev), minimizing the sum of absolute
differences. Ties go to the smaller displacement magnitude, then to the
earlier candidate in a row-major (dy, dx) scan of the displacement grid, so
the field is fully deterministic. The winning displacement is assigned to
every pixel of the block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imaging import Blob

DEFAULT_PATCH = 8
DEFAULT_SEARCH_RADIUS = 16


@dataclass(frozen=True)
class BlobFlowStats:
    """Flow magnitude interval and center angle for one blob.

    ``dom_lo``/``dom_hi`` bound the mean magnitude plus or minus one
    (population) standard deviation; ``center_angle`` is atan2(dy, dx) at the
    blob's box center, in (-pi, pi].
    """

    mean_mag: float
    std_mag: float
    dom_lo: float
    dom_hi: float
    center_angle: float


def compute_flow(
    prev: np.ndarray,
    curr: np.ndarray,
    patch: int = DEFAULT_PATCH,
    search_radius: int = DEFAULT_SEARCH_RADIUS,
) -> np.ndarray:
    """Blockwise flow from ``prev`` to ``curr`` as an (H, W, 2) float field.

    ``field[y, x]`` is ``(dx, dy)``: content now at (x, y) came from
    (x - dx, y - dy) in the previous frame.
    """
    prev = np.asarray(prev)
    curr = np.asarray(curr)
    if prev.shape != curr.shape or prev.ndim != 2:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {curr.shape}")
    if patch < 1:
        raise ValueError("patch must be >= 1")
    h, w = curr.shape
    prev_i = prev.astype(np.int16)
    curr_i = curr.astype(np.int16)

    nby = -(-h // patch)
    nbx = -(-w // patch)
    row_starts = np.arange(nby) * patch
    row_ends = np.minimum(row_starts + patch, h)
    col_starts = np.arange(nbx) * patch
    col_ends = np.minimum(col_starts + patch, w)

    big = np.iinfo(np.int64).max
    best_sad = np.full((nby, nbx), big, dtype=np.int64)
    best_mag2 = np.full((nby, nbx), big, dtype=np.int64)
    best_dx = np.zeros((nby, nbx), dtype=np.int64)
    best_dy = np.zeros((nby, nbx), dtype=np.int64)

    for dy in range(-search_radius, search_radius + 1):
        y0 = max(0, dy)
        y1 = h + min(0, dy)
        if y1 - y0 < 1:
            continue
        # block rows fully covered by the valid overlap for this dy
        by_sel = np.nonzero((row_starts >= y0) & (row_ends <= y1))[0]
        if by_sel.size == 0:
            continue
        for dx in range(-search_radius, search_radius + 1):
            x0 = max(0, dx)
            x1 = w + min(0, dx)
            if x1 - x0 < 1:
                continue
            bx_sel = np.nonzero((col_starts >= x0) & (col_ends <= x1))[0]
            if bx_sel.size == 0:
                continue
            diff = np.abs(
                curr_i[y0:y1, x0:x1] - prev_i[y0 - dy : y1 - dy, x0 - dx : x1 - dx]
            )
            # integral image lets aligned and ragged blocks share one path
            integral = np.zeros((diff.shape[0] + 1, diff.shape[1] + 1), dtype=np.int64)
            np.cumsum(np.cumsum(diff, axis=0, dtype=np.int64), axis=1, out=integral[1:, 1:])
            ry0 = row_starts[by_sel] - y0
            ry1 = row_ends[by_sel] - y0
            rx0 = col_starts[bx_sel] - x0
            rx1 = col_ends[bx_sel] - x0
            sad = (
                integral[np.ix_(ry1, rx1)]
                - integral[np.ix_(ry0, rx1)]
                - integral[np.ix_(ry1, rx0)]
                + integral[np.ix_(ry0, rx0)]
            )
            mag2 = dx * dx + dy * dy
            sub = np.ix_(by_sel, bx_sel)
            better = (sad < best_sad[sub]) | (
                (sad == best_sad[sub]) & (mag2 < best_mag2[sub])
            )
            if better.any():
                cur_sad = best_sad[sub]
                cur_mag = best_mag2[sub]
                cur_dx = best_dx[sub]
                cur_dy = best_dy[sub]
                best_sad[sub] = np.where(better, sad, cur_sad)
                best_mag2[sub] = np.where(better, mag2, cur_mag)
                best_dx[sub] = np.where(better, dx, cur_dx)
                best_dy[sub] = np.where(better, dy, cur_dy)

    field = np.zeros((h, w, 2), dtype=np.float64)
    field[:, :, 0] = np.repeat(np.repeat(best_dx, patch, axis=0), patch, axis=1)[:h, :w]
    field[:, :, 1] = np.repeat(np.repeat(best_dy, patch, axis=0), patch, axis=1)[:h, :w]
    return field


def blob_flow_stats(field: np.ndarray, blob: Blob) -> BlobFlowStats:
    """Magnitude mean/std over the blob's pixels and the center-pixel angle.

    The angle is read at the bbox center, snapped to the nearest blob pixel
    when the center itself is not part of the blob (concave blobs).
    """
    xs = blob.pixels[:, 0]
    ys = blob.pixels[:, 1]
    vecs = field[ys, xs]
    mags = np.hypot(vecs[:, 0], vecs[:, 1])
    mean = float(mags.mean())
    std = float(mags.std())

    cx = blob.bbox.x + (blob.bbox.w - 1) // 2
    cy = blob.bbox.y + (blob.bbox.h - 1) // 2
    at_center = (xs == cx) & (ys == cy)
    if not at_center.any():
        d2 = (xs - cx) ** 2 + (ys - cy) ** 2
        nearest = int(np.argmin(d2))
        cx, cy = int(xs[nearest]), int(ys[nearest])
    angle = math.atan2(field[cy, cx, 1], field[cy, cx, 0])
    return BlobFlowStats(mean, std, mean - std, mean + std, angle)


def angle_diff(a: float, b: float) -> float:
    """Circular distance between two angles, in [0, pi]."""
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)
