"""Flow separation: split a blob holding two objects that move in opposite
directions.

Flow vectors over the blob's pixels are clustered with k-means (k = 3: one
cluster soaks up background-like motion, the other two the objects). Tight
boxes are fitted to the pixel positions of each cluster; a cluster pair whose
boxes barely intersect (ratio below ``t_int``) while their mean-flow angles
disagree by more than the merge tolerance marks two distinct objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .flow import angle_diff
from .imaging import Blob, PixelBox, box_intersection_area, tight_box
from .merging import MergeConfig, RefinementLedger

DEFAULT_T_INT = 0.40


@dataclass
class SplitConfig:
    k: int = 3
    t_int: float = DEFAULT_T_INT
    seed: int = 0
    max_iter: int = 100

    def __post_init__(self):
        if self.k != 3:
            raise ValueError("cluster count is fixed at 3")
        if not 0.0 <= self.t_int <= 1.0:
            raise ValueError("t_int must be in [0, 1]")


def kmeans_flow(vectors: np.ndarray, cfg: SplitConfig) -> list[tuple[np.ndarray, np.ndarray]] | None:
    """Cluster (dx, dy) vectors into 3 groups; None when degenerate.

    Lloyd iteration with deterministic farthest-point seeding from
    ``cfg.seed``. Empty clusters are reseeded to the point farthest from its
    assigned centroid. Returns (member indices, centroid) per cluster, or
    None when fewer than 3 distinct vectors exist.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if len(np.unique(vectors, axis=0)) < cfg.k:
        return None

    rng = np.random.default_rng(cfg.seed)
    n = len(vectors)
    centroids = np.empty((cfg.k, 2), dtype=np.float64)
    centroids[0] = vectors[rng.integers(n)]
    d2 = ((vectors - centroids[0]) ** 2).sum(axis=1)
    for k in range(1, cfg.k):
        centroids[k] = vectors[int(np.argmax(d2))]
        d2 = np.minimum(d2, ((vectors - centroids[k]) ** 2).sum(axis=1))

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(cfg.max_iter):
        dists = ((vectors[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(dists, axis=1)
        assigned = dists[np.arange(n), new_labels]
        for k in range(cfg.k):
            if not (new_labels == k).any():
                worst = int(np.argmax(assigned))
                new_labels[worst] = k
                assigned[worst] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(cfg.k):
            centroids[k] = vectors[labels == k].mean(axis=0)

    return [(np.nonzero(labels == k)[0], centroids[k].copy()) for k in range(cfg.k)]


def ratio_int(ri: PixelBox, rj: PixelBox) -> float:
    """Box intersection area over the smaller box area, in [0, 1]."""
    return box_intersection_area(ri, rj) / min(ri.area(), rj.area())


def split_pass(
    blob: Blob,
    field: np.ndarray,
    cfg: SplitConfig,
    merge_cfg: MergeConfig,
    ledger: RefinementLedger,
) -> list[PixelBox]:
    """Either the blob's own box, or two boxes covering opposite movers.

    A cluster pair qualifies when its boxes' ratio_int is below ``t_int``
    and the angle between the cluster mean flows exceeds the merge angle
    tolerance (the negation of merge condition C3). When several pairs
    qualify, the lowest ratio_int wins, larger combined area breaking ties.
    The split, if any, is recorded in ``ledger.split_flow``.
    """
    vectors = field[blob.pixels[:, 1], blob.pixels[:, 0]]
    clusters = kmeans_flow(vectors, cfg)
    if clusters is None:
        return [blob.bbox]

    fitted = []
    for indices, _centroid in clusters:
        if indices.size == 0:
            fitted.append(None)
            continue
        members = vectors[indices]
        mean_vec = members.mean(axis=0)
        box = tight_box(blob.pixels[indices])
        fitted.append((box, math.atan2(mean_vec[1], mean_vec[0])))

    best = None
    for i in range(len(fitted)):
        for j in range(i + 1, len(fitted)):
            if fitted[i] is None or fitted[j] is None:
                continue
            box_i, ang_i = fitted[i]
            box_j, ang_j = fitted[j]
            ratio = ratio_int(box_i, box_j)
            if ratio >= cfg.t_int:
                continue
            if angle_diff(ang_i, ang_j) <= merge_cfg.a_t:
                continue
            combined = box_i.area() + box_j.area()
            key = (ratio, -combined)
            if best is None or key < best[0]:
                best = (key, box_i, box_j)

    if best is None:
        return [blob.bbox]
    pair = (best[1], best[2])
    ledger.split_flow[blob.id] = pair
    return [pair[0], pair[1]]
