"""Deterministic generators of self-similar test imagery and synthetic scenes.

These are the ground truth for the self-similarity properties: a Sierpinski
mask's top-level sub-triangles really are shaped like the whole, a solid
disk's sub-crops are not, and a value-noise plume sits in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evaluation import GroundTruth
from .geometry import BBox
from .mask import BinaryMask, GrayImage, _round_half_up


@dataclass(frozen=True)
class SceneObject:
    kind: str  # sierpinski | plume | solid
    box: BBox
    class_id: int

    def __post_init__(self):
        if self.kind not in ("sierpinski", "plume", "solid"):
            raise ValueError(f"unknown object kind {self.kind!r}")


@dataclass(frozen=True)
class SceneSpec:
    """Recipe for one synthetic scene."""

    seed: int
    width: int
    height: int
    objects: tuple[SceneObject, ...] = ()
    image_id: int = 0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("scene dimensions must be positive")
        object.__setattr__(self, "objects", tuple(self.objects))
        for obj in self.objects:
            x0, y0, x1, y1 = obj.box.corners()
            if x0 < 0 or y0 < 0 or x1 > self.width or y1 > self.height:
                raise ValueError(f"placement {obj.box} outside {self.width}x{self.height} scene")


@dataclass(frozen=True)
class SyntheticScene:
    """Rendered scene with its ground truth and the known-fractal sub-boxes."""

    image: GrayImage
    gts: tuple[GroundTruth, ...]
    fractal_regions: tuple[tuple[BBox, ...], ...]  # per object, parallel to gts


def _triangles(a, b, c, depth, out):
    # Midpoint subdivision; the middle (inverted) triangle is dropped.
    if depth == 0:
        out.append((a, b, c))
        return
    ab = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    ac = ((a[0] + c[0]) / 2, (a[1] + c[1]) / 2)
    bc = ((b[0] + c[0]) / 2, (b[1] + c[1]) / 2)
    _triangles(a, ab, ac, depth - 1, out)
    _triangles(ab, b, bc, depth - 1, out)
    _triangles(ac, bc, c, depth - 1, out)


def _fill_triangle(bits: np.ndarray, a, b, c) -> None:
    h, w = bits.shape
    xs = np.array([a[0], b[0], c[0]])
    ys = np.array([a[1], b[1], c[1]])
    c0 = max(0, int(np.floor(xs.min() - 0.5)))
    c1 = min(w, int(np.ceil(xs.max() + 0.5)))
    r0 = max(0, int(np.floor(ys.min() - 0.5)))
    r1 = min(h, int(np.ceil(ys.max() + 0.5)))
    if c1 <= c0 or r1 <= r0:
        return
    px = np.arange(c0, c1, dtype=np.float64) + 0.5
    py = np.arange(r0, r1, dtype=np.float64) + 0.5
    gx, gy = np.meshgrid(px, py)

    def cross(p, q):
        return (q[0] - p[0]) * (gy - p[1]) - (q[1] - p[1]) * (gx - p[0])

    d1, d2, d3 = cross(a, b), cross(b, c), cross(c, a)
    inside = ((d1 >= 0) & (d2 >= 0) & (d3 >= 0)) | ((d1 <= 0) & (d2 <= 0) & (d3 <= 0))
    bits[r0:r1, c0:c1] |= inside


def _render_sierpinski(width: int, height: int, depth: int) -> np.ndarray:
    apex = (width / 2, 0.0)
    bl = (0.0, float(height))
    br = (float(width), float(height))
    tris: list = []
    _triangles(apex, bl, br, depth, tris)
    bits = np.zeros((height, width), dtype=bool)
    for a, b, c in tris:
        _fill_triangle(bits, a, b, c)
    return bits


def gen_sierpinski(depth: int, size: int) -> BinaryMask:
    """Sierpinski mask on a size x size canvas; depth 0 is the filled triangle.

    Foreground area tracks (3/4)**depth of the depth-0 area up to
    rasterization error, so the smallest triangle must span at least a pixel.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    if size < 2 ** depth:
        raise ValueError(f"size {size} too small for depth {depth} (need >= {2 ** depth})")
    return BinaryMask(_render_sierpinski(size, size, depth))


def sierpinski_regions(box: BBox) -> tuple[BBox, BBox, BBox]:
    """Bounding boxes of the three top-level sub-triangles of a rendered box."""
    w2, h2 = box.w / 2, box.h / 2
    return (
        BBox(box.x, box.y - box.h / 4, w2, h2),          # top
        BBox(box.x - box.w / 4, box.y + box.h / 4, w2, h2),  # bottom-left
        BBox(box.x + box.w / 4, box.y + box.h / 4, w2, h2),  # bottom-right
    )


# splitmix64 finalizer; all noise randomness flows through this integer hash.
_GAMMA = np.uint64(0x9E3779B97F4A7C15)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _lattice01(seed: int, octave: int, xi: np.ndarray, yi: np.ndarray) -> np.ndarray:
    base = np.uint64((seed * 0x9E3779B97F4A7C15 + octave * 0xC2B2AE3D27D4EB4F) % (1 << 64))
    h = _mix64(xi.astype(np.uint64) * _GAMMA + _mix64(yi.astype(np.uint64) + base))
    return h.astype(np.float64) / float(1 << 64)


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t * t * (3.0 - 2.0 * t)


def _value_noise(seed: int, width: int, height: int, octave: int) -> np.ndarray:
    cells = 2 ** octave + 1
    scale = cells / max(width, height)
    gx, gy = np.meshgrid(np.arange(width) * scale, np.arange(height) * scale)
    x0 = np.floor(gx).astype(np.int64)
    y0 = np.floor(gy).astype(np.int64)
    tx = _smoothstep(gx - x0)
    ty = _smoothstep(gy - y0)
    v00 = _lattice01(seed, octave, x0, y0)
    v10 = _lattice01(seed, octave, x0 + 1, y0)
    v01 = _lattice01(seed, octave, x0, y0 + 1)
    v11 = _lattice01(seed, octave, x0 + 1, y0 + 1)
    top = v00 + (v10 - v00) * tx
    bot = v01 + (v11 - v01) * tx
    return top + (bot - top) * ty


def _render_plume(seed: int, width: int, height: int, octaves: int) -> np.ndarray:
    if octaves < 1:
        raise ValueError(f"octaves must be >= 1, got {octaves}")
    total = np.zeros((height, width))
    amp_sum = 0.0
    for o in range(octaves):
        amp = 0.5 ** o  # persistence 0.5
        total += amp * _value_noise(seed, width, height, o)
        amp_sum += amp
    noise = total / amp_sum
    cy, cx = (height - 1) / 2, (width - 1) / 2
    gx, gy = np.meshgrid(np.arange(width), np.arange(height))
    d2 = ((gx - cx) / (width / 2)) ** 2 + ((gy - cy) / (height / 2)) ** 2
    atten = np.clip(1.0 - d2, 0.0, 1.0)
    # Base glow keeps the core bright so Otsu always finds a foreground blob.
    val = atten * (0.4 + 0.6 * noise)
    return np.floor(val * 255.0 + 0.5).astype(np.uint8)


def gen_plume(seed: int, size: int, octaves: int = 4) -> GrayImage:
    """Radially attenuated multi-octave value-noise blob; same seed, same bytes."""
    return GrayImage(_render_plume(seed, size, size, octaves))


def _render_solid(width: int, height: int) -> np.ndarray:
    gx, gy = np.meshgrid(np.arange(width) + 0.5, np.arange(height) + 0.5)
    d2 = ((gx - width / 2) / (width / 2)) ** 2 + ((gy - height / 2) / (height / 2)) ** 2
    return np.where(d2 <= 1.0, 255, 0).astype(np.uint8)


def _pixel_rect(box: BBox, width: int, height: int) -> tuple[int, int, int, int]:
    x0, y0, x1, y1 = box.corners()
    c0 = max(0, _round_half_up(x0))
    r0 = max(0, _round_half_up(y0))
    c1 = min(width, _round_half_up(x1))
    r1 = min(height, _round_half_up(y1))
    return r0, c0, r1, c1


def _sierpinski_depth(w: int, h: int) -> int:
    d = 0
    while 2 ** (d + 1) <= min(w, h) and d < 3:
        d += 1
    return d


def compose_scene(spec: SceneSpec) -> SyntheticScene:
    """Render the spec's objects onto a dark background.

    Ground-truth boxes are the placement boxes.  Placements must not overlap;
    scene semantics (one detection matches one object) rely on it.
    """
    rects = [_pixel_rect(o.box, spec.width, spec.height) for o in spec.objects]
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            r0a, c0a, r1a, c1a = rects[i]
            r0b, c0b, r1b, c1b = rects[j]
            if r0a < r1b and r0b < r1a and c0a < c1b and c0b < c1a:
                raise ValueError(f"overlapping placements: objects {i} and {j}")

    img = np.zeros((spec.height, spec.width), dtype=np.uint8)
    gts = []
    regions = []
    for idx, obj in enumerate(spec.objects):
        r0, c0, r1, c1 = rects[idx]
        w, h = c1 - c0, r1 - r0
        if w < 1 or h < 1:
            raise ValueError(f"placement {obj.box} covers no pixels")
        if obj.kind == "sierpinski":
            bits = _render_sierpinski(w, h, _sierpinski_depth(w, h))
            img[r0:r1, c0:c1][bits] = 255
            regions.append(sierpinski_regions(obj.box))
        elif obj.kind == "solid":
            tile = _render_solid(w, h)
            img[r0:r1, c0:c1] = np.maximum(img[r0:r1, c0:c1], tile)
            regions.append(())
        else:  # plume
            tile = _render_plume(spec.seed * 1000003 + idx, w, h, octaves=4)
            img[r0:r1, c0:c1] = np.maximum(img[r0:r1, c0:c1], tile)
            regions.append((_densest_quadrant(tile, obj.box),))
        gts.append(GroundTruth(image_id=spec.image_id, class_id=obj.class_id, box=obj.box))
    return SyntheticScene(image=GrayImage(img), gts=tuple(gts), fractal_regions=tuple(regions))


def _densest_quadrant(tile: np.ndarray, box: BBox) -> BBox:
    h, w = tile.shape
    hw, hh = w // 2, h // 2
    quads = {
        "tl": tile[:hh, :hw], "tr": tile[:hh, hw:],
        "bl": tile[hh:, :hw], "br": tile[hh:, hw:],
    }
    name = max(quads, key=lambda k: int(quads[k].sum()))  # dict order breaks ties
    dx = -box.w / 4 if name in ("tl", "bl") else box.w / 4
    dy = -box.h / 4 if name in ("tl", "tr") else box.h / 4
    return BBox(box.x + dx, box.y + dy, box.w / 2, box.h / 2)
