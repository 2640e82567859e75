"""File formats: PGM/PPM/PNG frames, PGM masks, and the CSV schemas.

Frame directories follow the ``frames/%06d.{pgm,png,ppm}`` convention with
``masks/%06d.pgm`` aligned by index. Box lists serialize as
``frame,blob_id,x,y,w,h``; refined detections as ``frame,source,x,y,w,h``;
ground truth and track files as ``frame,id,x,y,w,h[,label]``.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .imaging import PixelBox

FRAME_EXTENSIONS = (".pgm", ".png", ".ppm")
_INDEX_RE = re.compile(r"^(\d+)$")


class DataFormatError(ValueError):
    """A file parsed but its contents violate the expected schema."""


def read_frame(path) -> np.ndarray:
    """Read an image file as an (H, W, 3) uint8 RGB frame.

    Grayscale inputs are replicated across channels.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"frame file not found: {path}")
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return arr


def read_gray(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"frame file not found: {path}")
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8)


def read_mask(path, expected_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Read a mask image; nonzero pixels become foreground.

    Raises when the file is missing or its size disagrees with
    ``expected_shape`` (H, W).
    """
    arr = read_gray(path)
    if expected_shape is not None and arr.shape != tuple(expected_shape):
        raise DataFormatError(
            f"mask {path} has size {arr.shape[1]}x{arr.shape[0]}, "
            f"expected {expected_shape[1]}x{expected_shape[0]}"
        )
    return arr > 0


def write_mask(path, mask: np.ndarray) -> None:
    """Write a bool mask as an 8-bit PGM with values 0/255."""
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def write_frame(path, frame: np.ndarray) -> None:
    frame = np.asarray(frame, dtype=np.uint8)
    if frame.ndim == 2:
        Image.fromarray(frame, mode="L").save(path)
    else:
        Image.fromarray(frame, mode="RGB").save(path)


def list_frames(frames_dir) -> list[tuple[int, Path]]:
    """Enumerate frame files as (index, path), sorted by numeric index."""
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise FileNotFoundError(f"frames directory not found: {frames_dir}")
    found = []
    for path in sorted(frames_dir.iterdir()):
        if path.suffix.lower() not in FRAME_EXTENSIONS:
            continue
        m = _INDEX_RE.match(path.stem)
        if m is None:
            continue
        found.append((int(m.group(1)), path))
    found.sort(key=lambda item: item[0])
    return found


def write_blob_boxes_csv(path, rows) -> None:
    """Write raw blob boxes: rows of (frame, blob_id, PixelBox)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "blob_id", "x", "y", "w", "h"])
        for frame, blob_id, box in rows:
            writer.writerow([frame, blob_id, box.x, box.y, box.w, box.h])


def write_detection_csv(path, rows) -> None:
    """Write refined detections: rows of (frame, source, PixelBox)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "source", "x", "y", "w", "h"])
        for frame, source, box in rows:
            writer.writerow([frame, source, box.x, box.y, box.w, box.h])


def write_annotations_csv(path, entries) -> None:
    """Write ground truth / track entries: (frame, id, PixelBox[, label])."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "id", "x", "y", "w", "h", "label"])
        for entry in entries:
            frame, obj_id, box = entry[0], entry[1], entry[2]
            label = entry[3] if len(entry) > 3 else ""
            writer.writerow([frame, obj_id, box.x, box.y, box.w, box.h, label])


def _parse_int(text: str, path, lineno: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: bad {what} value {text!r}") from None


def read_boxes_csv(path) -> dict[int, list[PixelBox]]:
    """Read any of the box CSV flavors as frame -> list of boxes.

    Column two (blob_id / source / object id) is ignored. A header row is
    skipped when present. Malformed rows raise with their line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"box file not found: {path}")
    out: dict[int, list[PixelBox]] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and not row[0].strip().lstrip("-").isdigit()):
                continue
            if len(row) < 6:
                raise DataFormatError(f"{path}:{lineno}: expected 6+ columns, got {len(row)}")
            frame = _parse_int(row[0], path, lineno, "frame")
            x, y, w, h = (_parse_int(v, path, lineno, "box") for v in row[2:6])
            if w < 1 or h < 1:
                raise DataFormatError(f"{path}:{lineno}: degenerate box {w}x{h}")
            out.setdefault(frame, []).append(PixelBox(x, y, w, h))
    return out


def read_annotations_csv(path) -> dict[int, list[tuple[int, PixelBox]]]:
    """Read ground truth or track files as frame -> [(object id, box)]."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"annotation file not found: {path}")
    out: dict[int, list[tuple[int, PixelBox]]] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and not row[0].strip().lstrip("-").isdigit()):
                continue
            if len(row) < 6:
                raise DataFormatError(f"{path}:{lineno}: expected 6+ columns, got {len(row)}")
            frame = _parse_int(row[0], path, lineno, "frame")
            obj_id = _parse_int(row[1], path, lineno, "id")
            x, y, w, h = (_parse_int(v, path, lineno, "box") for v in row[2:6])
            if obj_id < 0:
                raise DataFormatError(f"{path}:{lineno}: negative object id {obj_id}")
            if w < 1 or h < 1:
                raise DataFormatError(f"{path}:{lineno}: degenerate box {w}x{h}")
            out.setdefault(frame, []).append((obj_id, PixelBox(x, y, w, h)))
    return out


def write_flow_csv(path, field: np.ndarray) -> None:
    """Debug dump of a flow field as x,y,dx,dy rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "dx", "dy"])
        h, w = field.shape[:2]
        for y in range(h):
            for x in range(w):
                writer.writerow([x, y, field[y, x, 0], field[y, x, 1]])
