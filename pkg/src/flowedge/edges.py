"""Edge analysis over blob windows: median-adaptive Canny on the current
frame and the background snapshot, xor suppression of background edges, and
Manhattan-distance grouping of the surviving edge pixels into candidate
boxes.

Both Canny runs share the threshold pair computed from the current-frame
window, so co-located background structures cancel in the xor.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import EIGHT_CONNECTED, Blob, PixelBox, dilate
from .merging import RefinementLedger

DEFAULT_SIGMA = 1.0 / 3.0
DEFAULT_GROUP_DIST = 2
DEFAULT_MIN_GROUP_SIZE = 10

GAUSS_SIZE = 5
GAUSS_SIGMA = 1.4


@dataclass
class EdgeConfig:
    sigma: float = DEFAULT_SIGMA
    group_dist: int = DEFAULT_GROUP_DIST
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE
    tolerant: bool = False

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must be in (0, 1)")
        if self.group_dist < 1:
            raise ValueError("group_dist must be >= 1")


@dataclass
class EdgeGroup:
    """Edge pixels mutually reachable through short Manhattan hops."""

    pixels: np.ndarray
    bbox: PixelBox


def _gaussian_kernel() -> np.ndarray:
    half = GAUSS_SIZE // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    kern = np.exp(-(xx * xx + yy * yy) / (2.0 * GAUSS_SIGMA * GAUSS_SIGMA))
    return kern / kern.sum()


_GAUSS = _gaussian_kernel()


def lower_median(values: np.ndarray) -> float:
    """Median taking the lower of the two middle values for even counts."""
    flat = np.sort(np.asarray(values).ravel())
    return float(flat[(flat.size - 1) // 2])


def canny_thresholds(window: np.ndarray, cfg: EdgeConfig) -> tuple[float, float]:
    """Hysteresis thresholds adapted to the window's median intensity:
    t_low = (1 - sigma) * median, t_high = (1 + sigma) * median."""
    med = lower_median(window)
    return (1.0 - cfg.sigma) * med, (1.0 + cfg.sigma) * med


def canny(window: np.ndarray, t_low: float, t_high: float) -> np.ndarray:
    """Canny edge map of a grayscale window as a bool array.

    5x5 Gaussian smoothing (sigma 1.4), unnormalized Sobel gradients,
    non-maximum suppression along the quantized gradient direction (4 bins),
    then hysteresis: pixels >= t_high seed edges, pixels >= t_low survive
    when 8-connected to a seed. Border pixels are never edges.
    """
    if t_low > t_high:
        raise ValueError("t_low must be <= t_high")
    window = np.asarray(window, dtype=np.float64)
    if window.shape[0] < 3 or window.shape[1] < 3:
        return np.zeros(window.shape, dtype=bool)

    smooth = ndimage.convolve(window, _GAUSS, mode="nearest")
    gx = ndimage.sobel(smooth, axis=1, mode="nearest")
    gy = ndimage.sobel(smooth, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    theta = np.degrees(np.arctan2(gy, gx)) % 180.0

    pad = np.pad(mag, 1, constant_values=-1.0)
    left = pad[1:-1, :-2]
    right = pad[1:-1, 2:]
    up = pad[:-2, 1:-1]
    down = pad[2:, 1:-1]
    ul = pad[:-2, :-2]
    ur = pad[:-2, 2:]
    dl = pad[2:, :-2]
    dr = pad[2:, 2:]

    bins = [
        (theta < 22.5) | (theta >= 157.5),
        (theta >= 22.5) & (theta < 67.5),
        (theta >= 67.5) & (theta < 112.5),
        (theta >= 112.5) & (theta < 157.5),
    ]
    # y grows downward, so a 45-degree gradient points down-right
    n1 = np.select(bins, [left, ul, up, ur])
    n2 = np.select(bins, [right, dr, down, dl])
    # strict on one side so a symmetric step yields a single-pixel line
    keep = (mag > n1) & (mag >= n2)
    keep[0, :] = keep[-1, :] = False
    keep[:, 0] = keep[:, -1] = False

    strong = keep & (mag >= t_high)
    if not strong.any():
        return np.zeros(window.shape, dtype=bool)
    weak = keep & (mag >= t_low)
    labels, _ = ndimage.label(weak, structure=EIGHT_CONNECTED)
    return weak & np.isin(labels, np.unique(labels[strong]))


def foreground_edges(e_i: np.ndarray, e_a: np.ndarray) -> np.ndarray:
    """Per-pixel xor: current-frame edges with background edges removed."""
    e_i = np.asarray(e_i, dtype=bool)
    e_a = np.asarray(e_a, dtype=bool)
    if e_i.shape != e_a.shape:
        raise ValueError(f"edge map shapes differ: {e_i.shape} vs {e_a.shape}")
    return e_i ^ e_a


def group_edges(e_f: np.ndarray, cfg: EdgeConfig) -> list[EdgeGroup]:
    """Partition edge pixels into groups closed under Manhattan-distance
    hops of at most ``cfg.group_dist``; groups smaller than
    ``cfg.min_group_size`` are discarded as noise.

    Seeds are taken in row-major order, so group numbering is deterministic.
    """
    e_f = np.asarray(e_f, dtype=bool)
    h, w = e_f.shape
    r = cfg.group_dist
    offsets = [
        (dx, dy)
        for dy in range(-r, r + 1)
        for dx in range(-r, r + 1)
        if 0 < abs(dx) + abs(dy) <= r
    ]
    visited = np.zeros_like(e_f)
    groups = []
    for sy, sx in zip(*np.nonzero(e_f)):
        if visited[sy, sx]:
            continue
        queue = deque([(int(sx), int(sy))])
        visited[sy, sx] = True
        members = []
        while queue:
            x, y = queue.popleft()
            members.append((x, y))
            for dx, dy in offsets:
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and e_f[ny, nx] and not visited[ny, nx]:
                    visited[ny, nx] = True
                    queue.append((nx, ny))
        if len(members) < cfg.min_group_size:
            continue
        pixels = np.array(sorted(members, key=lambda p: (p[1], p[0])), dtype=np.int64)
        xs = pixels[:, 0]
        ys = pixels[:, 1]
        bbox = PixelBox(
            int(xs.min()),
            int(ys.min()),
            int(xs.max() - xs.min()) + 1,
            int(ys.max() - ys.min()) + 1,
        )
        groups.append(EdgeGroup(pixels, bbox))
    return groups


def edge_pass(
    blob: Blob,
    frame: np.ndarray,
    background: np.ndarray,
    cfg: EdgeConfig,
    ledger: RefinementLedger,
) -> list[PixelBox]:
    """Edge-derived candidate boxes for one blob, in image coordinates.

    Crops both the current frame and the background snapshot to the blob's
    box, detects edges in each with thresholds from the current-frame
    window, removes background edges, and groups what remains. An empty
    result marks the RoI as a background object; the (possibly empty) box
    list is recorded in ``ledger.edge_boxes``.
    """
    b = blob.bbox
    win_i = frame[b.y : b.y2, b.x : b.x2]
    win_a = background[b.y : b.y2, b.x : b.x2]
    t_low, t_high = canny_thresholds(win_i, cfg)
    e_i = canny(win_i, t_low, t_high)
    e_a = canny(win_a, t_low, t_high)
    if cfg.tolerant:
        e_f = e_i & ~dilate(e_a, 1)
    else:
        e_f = foreground_edges(e_i, e_a)
    boxes = [
        PixelBox(g.bbox.x + b.x, g.bbox.y + b.y, g.bbox.w, g.bbox.h)
        for g in group_edges(e_f, cfg)
    ]
    ledger.edge_boxes[blob.id] = boxes
    return boxes
