"""Deterministic synthetic scenes with ground truth.

Scenes composite textured rectangles or ellipses over a flat, striped, or
noise background; actors can drag a soft-edged multiplicative shadow, and
static props (no ground truth) render on top of everything to play the role
of occluding street furniture. All textures derive from fixed seeds, so a
script always renders to the same bytes.

The bundled presets exercise the classic background-subtraction failure
modes: fragmentation of one object, a same-direction pair merging by
proximity, an opposite-direction crossing, a walker with an attached shadow,
and occlusion by a thin static pole. Every preset keeps its actors out of
frame until after the default pipeline warmup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evaluation import GroundTruthEntry
from .imaging import PixelBox

PRESET_NAMES = (
    "fragmentation",
    "opposite_cross",
    "same_direction_pair",
    "shadow_walker",
    "static_occluder",
)


@dataclass(frozen=True)
class ActorSpec:
    """One moving textured shape.

    ``cell`` is the texture grain: intensities are drawn per cell x cell
    patch, so larger cells give the coarse internal structure (windows,
    panels) that edge detection keys on. ``camo_rows`` lists texture rows
    (relative to the actor) rendered at the flat ``camo_value`` intensity;
    rows matching the background within the subtractor's radius make the raw
    mask fragment, which is exactly what the merge stage is for.
    """

    shape: str = "rect"
    texture_seed: int = 0
    size: tuple[int, int] = (32, 32)
    start: tuple[int, int] = (0, 0)
    velocity: tuple[int, int] = (0, 0)
    values: tuple[int, int] = (120, 250)
    pattern: str = "cells"
    cell: int = 1
    levels: int = 0
    ring_width: int = 5
    noise_amp: int = 0
    border: tuple[int, int] | None = None
    shadow: tuple[int, int, float] | None = None
    penumbra: int = 3
    camo_rows: tuple[int, ...] = ()
    camo_value: int = 0


@dataclass(frozen=True)
class PropSpec:
    """Static scenery drawn over the actors; produces no ground truth."""

    box: PixelBox
    value: int


@dataclass(frozen=True)
class SceneScript:
    dims: tuple[int, int]
    length: int
    actors: tuple[ActorSpec, ...]
    background: tuple = ("flat", 40)
    props: tuple[PropSpec, ...] = ()

    def __post_init__(self):
        for actor in self.actors:
            if any(not float(v).is_integer() for v in actor.velocity):
                raise ValueError("actor velocities must be integer-valued")
            if _frames_partially_visible(self, actor) < 2:
                raise ValueError("every actor must be partially in-frame for >= 2 frames")


def _frames_partially_visible(script: SceneScript, actor: ActorSpec) -> int:
    w, h = script.dims
    aw, ah = actor.size
    count = 0
    for t in range(script.length):
        x = actor.start[0] + actor.velocity[0] * t
        y = actor.start[1] + actor.velocity[1] * t
        if x < w and x + aw > 0 and y < h and y + ah > 0:
            count += 1
    return count


def _actor_texture(actor: ActorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Gray texture block plus footprint mask for one actor."""
    w, h = actor.size
    rng = np.random.default_rng(actor.texture_seed)
    lo, hi = actor.values
    if actor.pattern == "rings":
        # concentric bands with diagonal spokes: long connected edges for the
        # edge stage, no block-sized repeats for the flow stage
        ys, xs = np.mgrid[0:h, 0:w]
        depth = np.minimum.reduce([xs, ys, w - 1 - xs, h - 1 - ys])
        phase = actor.texture_seed % (2 * actor.ring_width)
        band = ((depth + phase) // actor.ring_width) % 2
        tex = np.where(band == 0, float(lo), float(hi))
        diag1 = np.abs(xs * (h - 1) - ys * (w - 1)) <= (h - 1)
        diag2 = np.abs(xs * (h - 1) + ys * (w - 1) - (w - 1) * (h - 1)) <= (h - 1)
        tex[diag1 | diag2] = float(hi)
    elif actor.pattern == "cells":
        cell = max(1, actor.cell)
        grid = (-(-h // cell), -(-w // cell))
        if actor.levels >= 2:
            # quantized tones maximize cell-boundary contrast for edge detection
            step = (hi - lo) // (actor.levels - 1)
            cells = lo + rng.integers(0, actor.levels, size=grid) * step
        else:
            cells = rng.integers(lo, hi + 1, size=grid)
        tex = np.repeat(np.repeat(cells, cell, axis=0), cell, axis=1)[:h, :w].astype(np.float64)
    else:
        raise ValueError(f"unknown texture pattern {actor.pattern!r}")
    if actor.noise_amp > 0:
        tex = tex + rng.integers(-actor.noise_amp, actor.noise_amp + 1, size=(h, w))
    if actor.border is not None:
        # flat frame band: its rows/cols match themselves under any shift
        # along the band, so boundary blocks anchor to zero flow
        bw, bv = actor.border
        tex[:bw, :] = bv
        tex[-bw:, :] = bv
        tex[:, :bw] = bv
        tex[:, -bw:] = bv
    for row in actor.camo_rows:
        if 0 <= row < h:
            tex[row, :] = actor.camo_value
    if actor.shape == "ellipse":
        ys, xs = np.mgrid[0:h, 0:w]
        cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
        mask = ((xs - cx) / (w / 2.0)) ** 2 + ((ys - cy) / (h / 2.0)) ** 2 <= 1.0
    elif actor.shape == "rect":
        mask = np.ones((h, w), dtype=bool)
    else:
        raise ValueError(f"unknown actor shape {actor.shape!r}")
    return tex, mask


def _render_background(script: SceneScript) -> np.ndarray:
    w, h = script.dims
    kind = script.background[0]
    if kind == "flat":
        return np.full((h, w), float(script.background[1]))
    if kind == "noise":
        _, lo, hi, seed = script.background
        rng = np.random.default_rng(seed)
        return rng.integers(lo, hi + 1, size=(h, w)).astype(np.float64)
    if kind == "stripes":
        _, v1, v2, period, axis = script.background
        ys, xs = np.mgrid[0:h, 0:w]
        coord = xs if axis == "x" else ys
        return np.where((coord // period) % 2 == 0, float(v1), float(v2))
    if kind == "dots":
        # flat base with a grid of 2x2 painted marks (lane-dash look); the
        # marks give static structure that block matching can anchor to
        _, base, lo, hi, step_x, step_y, seed = script.background
        rng = np.random.default_rng(seed)
        canvas = np.full((h, w), float(base))
        values = rng.integers(lo, hi + 1, size=(-(-h // step_y), -(-w // step_x)))
        ys, xs = np.mgrid[0:h, 0:w]
        is_dot = (ys % step_y < 2) & (xs % step_x < 2)
        canvas[is_dot] = values[ys[is_dot] // step_y, xs[is_dot] // step_x]
        return canvas
    if kind == "plaid":
        # smooth triangle-wave field: too gentle for edge detection or the
        # subtractor to notice, but any shifted block match pays a mismatch
        # that grows with displacement, which anchors static regions to
        # zero flow
        _, base, amp_x, period_x, amp_y, period_y = script.background
        ys, xs = np.mgrid[0:h, 0:w]

        def tri(t, period, amp):
            return amp - (4.0 * amp / period) * np.abs((t % period) - period / 2.0)

        return base + tri(xs, period_x, amp_x) + tri(ys, period_y, amp_y)
    raise ValueError(f"unknown background spec {script.background!r}")


def _shadow_factor(actor: ActorSpec, w: int, h: int) -> np.ndarray:
    """Attenuation factors over the shadow footprint: the core sits at the
    shadow attenuation, ramping linearly back to 1 over ``penumbra`` px."""
    att = actor.shadow[2]
    ys, xs = np.mgrid[0:h, 0:w]
    depth = np.minimum.reduce([xs + 1, w - xs, ys + 1, h - ys]).astype(np.float64)
    ramp = np.minimum(depth, actor.penumbra + 1) / (actor.penumbra + 1)
    return 1.0 - (1.0 - att) * ramp


def render(script: SceneScript) -> tuple[list[np.ndarray], list[GroundTruthEntry]]:
    """Render every frame of the script; ground truth boxes are the visible
    extent of each actor (occluded or out-of-frame pixels do not count)."""
    w, h = script.dims
    bg = _render_background(script)
    textures = [_actor_texture(a) for a in script.actors]
    shadows = [
        _shadow_factor(a, a.size[0], a.size[1]) if a.shadow is not None else None
        for a in script.actors
    ]

    frames: list[np.ndarray] = []
    gt: list[GroundTruthEntry] = []
    for t in range(script.length):
        canvas = bg.copy()
        positions = [
            (a.start[0] + a.velocity[0] * t, a.start[1] + a.velocity[1] * t)
            for a in script.actors
        ]

        for idx, actor in enumerate(script.actors):
            if shadows[idx] is None:
                continue
            sx = positions[idx][0] + actor.shadow[0]
            sy = positions[idx][1] + actor.shadow[1]
            x0, y0 = max(0, sx), max(0, sy)
            x1 = min(w, sx + actor.size[0])
            y1 = min(h, sy + actor.size[1])
            if x0 < x1 and y0 < y1:
                local = shadows[idx][y0 - sy : y1 - sy, x0 - sx : x1 - sx]
                canvas[y0:y1, x0:x1] *= local

        coverage = np.full((h, w), -1, dtype=np.int64)
        for idx, actor in enumerate(script.actors):
            tex, mask = textures[idx]
            ax, ay = positions[idx]
            x0, y0 = max(0, ax), max(0, ay)
            x1 = min(w, ax + actor.size[0])
            y1 = min(h, ay + actor.size[1])
            if x0 >= x1 or y0 >= y1:
                continue
            sub = (slice(y0 - ay, y1 - ay), slice(x0 - ax, x1 - ax))
            local_mask = mask[sub]
            view = canvas[y0:y1, x0:x1]
            view[local_mask] = tex[sub][local_mask]
            cov = coverage[y0:y1, x0:x1]
            cov[local_mask] = idx

        for prop in script.props:
            b = prop.box
            x0, y0 = max(0, b.x), max(0, b.y)
            x1, y1 = min(w, b.x2), min(h, b.y2)
            if x0 < x1 and y0 < y1:
                canvas[y0:y1, x0:x1] = prop.value
                coverage[y0:y1, x0:x1] = -2

        gray = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
        frames.append(np.repeat(gray[:, :, None], 3, axis=2))

        for idx, actor in enumerate(script.actors):
            ys, xs = np.nonzero(coverage == idx)
            if ys.size == 0:
                continue
            x0, y0 = int(xs.min()), int(ys.min())
            box = PixelBox(x0, y0, int(xs.max()) - x0 + 1, int(ys.max()) - y0 + 1)
            gt.append(GroundTruthEntry(t, idx, box, actor.shape))
    return frames, gt


def preset(name: str) -> SceneScript:
    """Canned scripts for the pipeline failure modes; see module docstring.

    Every preset enters its actors during the default 30-frame warmup so
    that, once refinement activates, objects are fully inside the frame and
    their block flow has valid sources.
    """
    if name == "fragmentation":
        return SceneScript(
            dims=(160, 120),
            length=72,
            background=("flat", 40),
            actors=(
                ActorSpec(
                    shape="rect",
                    texture_seed=7,
                    size=(36, 36),
                    start=(-82, 42),
                    velocity=(3, 0),
                    values=(100, 240),
                    cell=4,
                    levels=2,
                    camo_rows=(9, 19, 29),
                    camo_value=22,
                ),
            ),
        )
    if name == "opposite_cross":
        return SceneScript(
            dims=(160, 120),
            length=72,
            background=("plaid", 90, 8, 40, 6, 24),
            actors=(
                ActorSpec(
                    shape="rect",
                    texture_seed=11,
                    size=(48, 44),
                    start=(-112, 30),
                    velocity=(4, 0),
                    values=(140, 255),
                    cell=4,
                    levels=2,
                    noise_amp=12,
                    border=(4, 165),
                ),
                ActorSpec(
                    shape="rect",
                    texture_seed=13,
                    size=(48, 44),
                    start=(224, 70),
                    velocity=(-4, 0),
                    values=(140, 255),
                    cell=4,
                    levels=2,
                    noise_amp=12,
                    border=(4, 165),
                ),
            ),
        )
    if name == "same_direction_pair":
        return SceneScript(
            dims=(160, 120),
            length=72,
            background=("flat", 50),
            actors=(
                ActorSpec(
                    shape="rect",
                    texture_seed=17,
                    size=(28, 40),
                    start=(-82, 30),
                    velocity=(3, 0),
                    values=(130, 250),
                    cell=4,
                    levels=2,
                ),
                ActorSpec(
                    shape="rect",
                    texture_seed=19,
                    size=(28, 28),
                    start=(-49, 36),
                    velocity=(3, 0),
                    values=(130, 250),
                    cell=4,
                    levels=2,
                ),
            ),
        )
    if name == "shadow_walker":
        return SceneScript(
            dims=(160, 120),
            length=72,
            background=("flat", 120),
            actors=(
                ActorSpec(
                    shape="rect",
                    texture_seed=23,
                    size=(24, 40),
                    start=(-52, 40),
                    velocity=(2, 0),
                    values=(150, 250),
                    cell=4,
                    levels=2,
                    shadow=(6, 6, 0.5),
                    penumbra=3,
                ),
            ),
        )
    if name == "static_occluder":
        return SceneScript(
            dims=(160, 120),
            length=72,
            background=("flat", 40),
            actors=(
                ActorSpec(
                    shape="rect",
                    texture_seed=29,
                    size=(40, 40),
                    start=(-82, 36),
                    velocity=(3, 0),
                    values=(140, 250),
                    cell=4,
                    levels=2,
                ),
            ),
            props=(PropSpec(PixelBox(84, 10, 1, 100), 46),),
        )
    raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")


def script_to_text(script: SceneScript) -> str:
    """Serialize a script as key = value lines."""
    lines = [
        f"dims = {script.dims[0]}x{script.dims[1]}",
        f"length = {script.length}",
        "background = " + ":".join(str(v) for v in script.background),
    ]
    for a in script.actors:
        parts = [
            a.shape,
            f"seed={a.texture_seed}",
            f"size={a.size[0]}x{a.size[1]}",
            f"start={a.start[0]},{a.start[1]}",
            f"vel={a.velocity[0]},{a.velocity[1]}",
            f"values={a.values[0]},{a.values[1]}",
            f"pattern={a.pattern}",
            f"cell={a.cell}",
            f"levels={a.levels}",
            f"ring_width={a.ring_width}",
            f"noise_amp={a.noise_amp}",
        ]
        if a.border is not None:
            parts.append(f"border={a.border[0]},{a.border[1]}")
        if a.shadow is not None:
            parts.append(f"shadow={a.shadow[0]},{a.shadow[1]},{a.shadow[2]}")
            parts.append(f"penumbra={a.penumbra}")
        if a.camo_rows:
            parts.append("camo_rows=" + ",".join(str(r) for r in a.camo_rows))
            parts.append(f"camo_value={a.camo_value}")
        lines.append("actor = " + ";".join(parts))
    for p in script.props:
        lines.append(f"prop = {p.box.x},{p.box.y},{p.box.w},{p.box.h},{p.value}")
    return "\n".join(lines) + "\n"


def script_from_text(text: str) -> SceneScript:
    """Parse the key = value script format written by :func:`script_to_text`."""
    dims = None
    length = None
    background = ("flat", 40)
    actors = []
    props = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"script line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "dims":
            w, h = value.split("x")
            dims = (int(w), int(h))
        elif key == "length":
            length = int(value)
        elif key == "background":
            parts = value.split(":")
            kind = parts[0]
            if kind == "flat":
                background = ("flat", int(parts[1]))
            elif kind == "noise":
                background = ("noise", int(parts[1]), int(parts[2]), int(parts[3]))
            elif kind == "stripes":
                background = ("stripes", int(parts[1]), int(parts[2]), int(parts[3]), parts[4])
            elif kind == "dots":
                background = ("dots",) + tuple(int(p) for p in parts[1:7])
            elif kind == "plaid":
                background = ("plaid",) + tuple(int(p) for p in parts[1:6])
            else:
                raise ValueError(f"script line {lineno}: unknown background {kind!r}")
        elif key == "actor":
            fields = value.split(";")
            kwargs: dict = {"shape": fields[0]}
            for item in fields[1:]:
                name, val = item.split("=", 1)
                if name == "seed":
                    kwargs["texture_seed"] = int(val)
                elif name in ("size",):
                    w, h = val.split("x")
                    kwargs["size"] = (int(w), int(h))
                elif name in ("start", "vel", "values"):
                    a, b = val.split(",")
                    target = {"start": "start", "vel": "velocity", "values": "values"}[name]
                    kwargs[target] = (int(a), int(b))
                elif name == "pattern":
                    kwargs["pattern"] = val
                elif name == "cell":
                    kwargs["cell"] = int(val)
                elif name == "levels":
                    kwargs["levels"] = int(val)
                elif name == "ring_width":
                    kwargs["ring_width"] = int(val)
                elif name == "noise_amp":
                    kwargs["noise_amp"] = int(val)
                elif name == "border":
                    bw, bv = val.split(",")
                    kwargs["border"] = (int(bw), int(bv))
                elif name == "shadow":
                    dx, dy, att = val.split(",")
                    kwargs["shadow"] = (int(dx), int(dy), float(att))
                elif name == "penumbra":
                    kwargs["penumbra"] = int(val)
                elif name == "camo_rows":
                    kwargs["camo_rows"] = tuple(int(r) for r in val.split(","))
                elif name == "camo_value":
                    kwargs["camo_value"] = int(val)
                else:
                    raise ValueError(f"script line {lineno}: unknown actor field {name!r}")
            actors.append(ActorSpec(**kwargs))
        elif key == "prop":
            x, y, w, h, v = (int(part) for part in value.split(","))
            props.append(PropSpec(PixelBox(x, y, w, h), v))
        else:
            raise ValueError(f"script line {lineno}: unknown key {key!r}")
    if dims is None or length is None:
        raise ValueError("script must define dims and length")
    return SceneScript(dims, length, tuple(actors), background, tuple(props))
