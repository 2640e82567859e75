"""Pixel-raster primitives shared by every pipeline stage.

Conventions used throughout the package:

* grayscale frames are ``(H, W)`` uint8 arrays, color frames ``(H, W, 3)``
  uint8 RGB, binary masks ``(H, W)`` bool; all rasters are row-major, so
  ``arr[y, x]`` addresses column ``x`` of row ``y``;
* boxes use half-open pixel ranges: a :class:`PixelBox` covers columns
  ``x .. x+w-1`` and rows ``y .. y+h-1``;
* blob pixel coordinates are ``(x, y)`` pairs kept in row-major order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import distance as spdist

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)
FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

#: Default floor (in pixels) below which connected regions are discarded.
DEFAULT_MIN_AREA = 50

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class PixelBox:
    """Axis-aligned box with half-open pixel ranges."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box must be at least 1x1, got {self.w}x{self.h}")

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    def area(self) -> int:
        return self.w * self.h

    def contains(self, px: int, py: int) -> bool:
        return self.x <= px < self.x2 and self.y <= py < self.y2


@dataclass
class Blob:
    """Connected foreground region: its pixels plus the tight enclosing box.

    ``pixels`` is an ``(N, 2)`` int array of ``(x, y)`` coordinates sorted in
    row-major order (by y, then x).
    """

    id: int
    pixels: np.ndarray
    bbox: PixelBox

    def area(self) -> int:
        return len(self.pixels)


def tight_box(pixels: np.ndarray) -> PixelBox:
    """Minimal box containing every ``(x, y)`` coordinate in ``pixels``."""
    xs = pixels[:, 0]
    ys = pixels[:, 1]
    x0 = int(xs.min())
    y0 = int(ys.min())
    return PixelBox(x0, y0, int(xs.max()) - x0 + 1, int(ys.max()) - y0 + 1)


def sort_row_major(pixels: np.ndarray) -> np.ndarray:
    """Sort ``(x, y)`` coordinate rows by y, then x."""
    order = np.lexsort((pixels[:, 0], pixels[:, 1]))
    return pixels[order]


def make_blob(blob_id: int, pixels: np.ndarray) -> Blob:
    pixels = sort_row_major(np.asarray(pixels, dtype=np.int64))
    return Blob(blob_id, pixels, tight_box(pixels))


def connected_components(mask: np.ndarray, min_area: int = DEFAULT_MIN_AREA) -> list[Blob]:
    """Extract 8-connected foreground regions of at least ``min_area`` pixels.

    Blobs are numbered 0..n-1 in order of their first pixel in a row-major
    scan, so extraction is deterministic.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    if count == 0:
        return []
    flat = labels.ravel()
    sizes = np.bincount(flat, minlength=count + 1)
    # first flat (row-major) index at which each label appears
    first_seen = np.full(count + 1, flat.size, dtype=np.int64)
    nonzero = np.flatnonzero(flat)
    np.minimum.at(first_seen, flat[nonzero], nonzero)
    order = [lab for lab in np.argsort(first_seen[1:]) + 1 if sizes[lab] >= min_area]

    blobs = []
    for blob_id, lab in enumerate(order):
        ys, xs = np.nonzero(labels == lab)
        pixels = np.column_stack([xs, ys]).astype(np.int64)
        blobs.append(Blob(blob_id, pixels, tight_box(pixels)))
    return blobs


def pixels_to_mask(pixels: np.ndarray, bbox: PixelBox) -> np.ndarray:
    """Rasterize blob pixels into a bool window the size of ``bbox``."""
    win = np.zeros((bbox.h, bbox.w), dtype=bool)
    win[pixels[:, 1] - bbox.y, pixels[:, 0] - bbox.x] = True
    return win


def blob_boundary(blob: Blob) -> np.ndarray:
    """Pixels of ``blob`` with at least one 4-neighbor outside the blob."""
    win = pixels_to_mask(blob.pixels, blob.bbox)
    inner = ndimage.binary_erosion(win, structure=FOUR_CONNECTED, border_value=0)
    ys, xs = np.nonzero(win & ~inner)
    return np.column_stack([xs + blob.bbox.x, ys + blob.bbox.y]).astype(np.int64)


def blobs_intersect(a: Blob, b: Blob) -> bool:
    ix = max(a.bbox.x, b.bbox.x)
    iy = max(a.bbox.y, b.bbox.y)
    ix2 = min(a.bbox.x2, b.bbox.x2)
    iy2 = min(a.bbox.y2, b.bbox.y2)
    if ix >= ix2 or iy >= iy2:
        return False
    win = pixels_to_mask(a.pixels, a.bbox)
    px = b.pixels[:, 0]
    py = b.pixels[:, 1]
    sel = (px >= ix) & (px < ix2) & (py >= iy) & (py < iy2)
    if not sel.any():
        return False
    return bool(win[py[sel] - a.bbox.y, px[sel] - a.bbox.x].any())


def blob_distance(a: Blob, b: Blob) -> float:
    """Minimum Euclidean distance between the pixels of two blobs.

    Computed over boundary pixels only; interior pixels cannot realize the
    minimum. Returns 0 when the pixel sets share a pixel.
    """
    if blobs_intersect(a, b):
        return 0.0
    pa = blob_boundary(a).astype(np.float64)
    pb = blob_boundary(b).astype(np.float64)
    return float(np.sqrt(spdist.cdist(pa, pb, "sqeuclidean").min()))


def box_union(a: PixelBox, b: PixelBox) -> PixelBox:
    """Smallest box framing both boxes."""
    x = min(a.x, b.x)
    y = min(a.y, b.y)
    return PixelBox(x, y, max(a.x2, b.x2) - x, max(a.y2, b.y2) - y)


def box_intersection_area(a: PixelBox, b: PixelBox) -> int:
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0
    return iw * ih


def box_iou(a: PixelBox, b: PixelBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    inter = box_intersection_area(a, b)
    union = a.area() + b.area() - inter
    return inter / union


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    """Grow foreground by ``radius`` pixels in every direction (Chebyshev)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    mask = np.asarray(mask, dtype=bool)
    if radius == 0:
        return mask.copy()
    footprint = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    return ndimage.binary_dilation(mask, structure=footprint)


def to_gray(frame: np.ndarray) -> np.ndarray:
    """Luma conversion: round(0.299 R + 0.587 G + 0.114 B), clamped to uint8."""
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError("expected an (H, W, 3) color frame")
    luma = (
        GRAY_WEIGHTS[0] * frame[:, :, 0]
        + GRAY_WEIGHTS[1] * frame[:, :, 1]
        + GRAY_WEIGHTS[2] * frame[:, :, 2]
    )
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)
