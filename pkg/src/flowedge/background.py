"""Background modelling: running-average color background and a sample-based
foreground subtractor, plus ingestion of externally produced masks.

The running average keeps real-valued accumulators and only rounds when a
snapshot is requested, so repeated updates do not drift.
"""

from __future__ import annotations

import numpy as np

from . import frameio

DEFAULT_ALPHA = 0.01


class BackgroundModel:
    """Per-pixel RGB running average: A_i = alpha * I + (1 - alpha) * A_{i-1}."""

    def __init__(self, alpha: float = DEFAULT_ALPHA):
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.alpha = alpha
        self.accumulator: np.ndarray | None = None
        self.frames_seen = 0

    def accumulate(self, frame: np.ndarray) -> None:
        frame = np.asarray(frame)
        if frame.ndim != 3 or frame.shape[2] != 3:
            raise ValueError("expected an (H, W, 3) color frame")
        if self.accumulator is None:
            self.accumulator = frame.astype(np.float64)
        else:
            if frame.shape != self.accumulator.shape:
                raise ValueError(
                    f"frame shape {frame.shape} does not match model {self.accumulator.shape}"
                )
            self.accumulator = self.alpha * frame + (1.0 - self.alpha) * self.accumulator
        self.frames_seen += 1

    def snapshot(self) -> np.ndarray:
        """Accumulator rounded per channel to a uint8 color frame."""
        if self.accumulator is None:
            raise ValueError("background model has seen no frames")
        return np.clip(np.rint(self.accumulator), 0, 255).astype(np.uint8)


class SampleSubtractor:
    """Sample-based background subtraction over grayscale frames.

    Each pixel keeps a ring of past intensity values; a new value is
    background when at least ``min_matches`` stored samples lie within
    ``match_radius`` of it. Background pixels refresh one random stored
    sample with probability ``update_prob`` (seeded RNG, so segmentation is
    reproducible). The model bootstraps from the first frame, which is
    classified all-background by convention.
    """

    def __init__(
        self,
        samples: int = 20,
        match_radius: int = 20,
        min_matches: int = 2,
        update_prob: float = 1.0 / 16.0,
        seed: int = 0,
    ):
        if samples < min_matches or min_matches < 1:
            raise ValueError("need samples >= min_matches >= 1")
        if match_radius <= 0:
            raise ValueError("match_radius must be positive")
        if not 0.0 <= update_prob <= 1.0:
            raise ValueError("update_prob must be in [0, 1]")
        self.n_samples = samples
        self.match_radius = match_radius
        self.min_matches = min_matches
        self.update_prob = update_prob
        self.rng = np.random.default_rng(seed)
        self.samples: np.ndarray | None = None

    def segment(self, frame: np.ndarray) -> np.ndarray:
        frame = np.asarray(frame)
        if frame.ndim != 2:
            raise ValueError("expected an (H, W) grayscale frame")
        if self.samples is None:
            self.samples = np.repeat(
                frame.astype(np.int16)[None, :, :], self.n_samples, axis=0
            )
            return np.zeros(frame.shape, dtype=bool)
        if frame.shape != self.samples.shape[1:]:
            raise ValueError(
                f"frame shape {frame.shape} does not match model {self.samples.shape[1:]}"
            )

        value = frame.astype(np.int16)
        matches = (np.abs(self.samples - value[None, :, :]) <= self.match_radius).sum(axis=0)
        foreground = matches < self.min_matches

        # stochastic refresh of one stored sample at background pixels;
        # RNG draws are shaped per-frame so runs replay identically
        refresh = (self.rng.random(frame.shape) < self.update_prob) & ~foreground
        slot = self.rng.integers(0, self.n_samples, size=frame.shape)
        ys, xs = np.nonzero(refresh)
        self.samples[slot[ys, xs], ys, xs] = value[ys, xs]
        return foreground


def ingest_mask(path, expected_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Load a precomputed foreground mask produced by an external subtractor."""
    return frameio.read_mask(path, expected_shape=expected_shape)
