"""Image-region to contour pipeline: crop, binarize, largest component, border trace.

The contour an image region contributes to the Hausdorff comparison is the
outer border of the largest connected foreground component of the binarized
crop, normalized by the crop's own width and height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import BBox, Contour, Space, hausdorff_points, normalize_contour


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image; pixels is an (h, w) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"image needs a non-empty (h, w) array, got shape {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean foreground mask; bits is an (h, w) bool array."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=bool)
        if b.ndim != 2 or b.shape[0] < 1 or b.shape[1] < 1:
            raise ValueError(f"mask needs a non-empty (h, w) array, got shape {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def area(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class ContourExtraction:
    """Extraction outcome: a normalized contour, or nothing if the crop had no foreground."""

    contour: Contour | None
    foreground_area: int

    def __post_init__(self):
        if (self.contour is not None) != (self.foreground_area > 0):
            raise ValueError("contour present iff foreground_area > 0")


# Instrumentation: number of extract_contour calls since the last reset.  The
# high-IoU bypass in the loss gate is verified against this counter.
_extract_calls = 0


def extraction_count() -> int:
    return _extract_calls


def reset_extraction_count() -> None:
    global _extract_calls
    _extract_calls = 0


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def crop(img: GrayImage, box: BBox) -> GrayImage:
    """Sub-image covered by a center-based box, edges rounded to nearest integer.

    The rectangle is clamped to the image; a box entirely outside raises.
    """
    x0, y0, x1, y1 = box.corners()
    c0 = max(0, _round_half_up(x0))
    r0 = max(0, _round_half_up(y0))
    c1 = min(img.width, _round_half_up(x1))
    r1 = min(img.height, _round_half_up(y1))
    if c1 <= c0 or r1 <= r0:
        raise ValueError(f"empty crop: box {box} does not cover any pixel of a "
                         f"{img.width}x{img.height} image")
    return GrayImage(img.pixels[r0:r1, c0:c1])


def parse_binarize_method(method: str) -> int | None:
    """Return the fixed threshold for 'fixed:<t>', or None for 'otsu'."""
    if method == "otsu":
        return None
    if method.startswith("fixed:"):
        t = int(method.split(":", 1)[1])
        if not 0 <= t <= 255:
            raise ValueError(f"fixed threshold must be in [0, 255], got {t}")
        return t
    raise ValueError(f"unknown binarize method {method!r} (expected 'otsu' or 'fixed:<t>')")


def otsu_threshold(img: GrayImage) -> int | None:
    """Threshold maximizing inter-class variance over the 256-bin histogram.

    Foreground is pixels >= threshold.  Returns None when no split produces a
    positive variance (uniform image), which callers treat as all-background.
    Ties resolve to the lowest maximizing threshold.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    csum = np.cumsum(hist)                      # mass of values <= i
    cmom = np.cumsum(hist * np.arange(256.0))   # first moment of values <= i
    w0 = csum[:-1]                              # background mass for t = i+1
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    var = np.zeros(255)
    m0 = np.divide(cmom[:-1], w0, out=np.zeros(255), where=valid)
    m1 = np.divide(cmom[-1] - cmom[:-1], w1, out=np.zeros(255), where=valid)
    var[valid] = (w0 * w1)[valid] * (m0 - m1)[valid] ** 2
    best = int(np.argmax(var))
    if var[best] <= 0.0:
        return None
    return best + 1


def binarize(img: GrayImage, method: str = "otsu") -> BinaryMask:
    """Foreground = pixels >= threshold, with the threshold fixed or from Otsu."""
    t = parse_binarize_method(method)
    if t is None:
        t = otsu_threshold(img)
        if t is None:
            return BinaryMask(np.zeros(img.pixels.shape, dtype=bool))
    return BinaryMask(img.pixels >= t)


_EIGHT = np.ones((3, 3), dtype=int)


def max_component(mask: BinaryMask) -> BinaryMask:
    """Keep only the largest 8-connected foreground component.

    scipy labels components in raster-scan order of their first pixel, and
    argmax takes the first maximal label, so area ties resolve to the
    component whose topmost-leftmost pixel comes first.
    """
    labels, n = ndimage.label(mask.bits, structure=_EIGHT)
    if n == 0:
        return BinaryMask(np.zeros(mask.bits.shape, dtype=bool))
    areas = np.bincount(labels.ravel())[1:]
    keep = int(np.argmax(areas)) + 1
    return BinaryMask(labels == keep)


# Moore neighborhood in clockwise order (y down), starting west: (dr, dc).
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_MOORE_INDEX = {d: i for i, d in enumerate(_MOORE)}


def trace_outer_contour(component: BinaryMask) -> Contour:
    """Outer border of a single 8-connected component by Moore-neighbor following.

    Starts at the topmost-leftmost foreground pixel and walks clockwise;
    points are pixel centers as (x=col, y=row).  The cycle is closed but the
    start point is not repeated at the end.  Interior articulation pixels may
    legitimately appear twice (the walk passes them on both sides).
    """
    bits = component.bits
    h, w = bits.shape
    flat = np.flatnonzero(bits)
    if flat.size == 0:
        raise ValueError("no foreground")
    start = (int(flat[0]) // w, int(flat[0]) % w)

    def scan(cur, back):
        # Clockwise around cur starting just after the backtrack direction.
        # Returns the next foreground pixel and the background cell examined
        # immediately before it (the new backtrack).
        bi = _MOORE_INDEX[(back[0] - cur[0], back[1] - cur[1])]
        prev = back
        for k in range(1, 9):
            dr, dc = _MOORE[(bi + k) % 8]
            nb = (cur[0] + dr, cur[1] + dc)
            if 0 <= nb[0] < h and 0 <= nb[1] < w and bits[nb]:
                return nb, prev
            prev = nb
        return None, prev

    path = [start]
    cur, back = start, (start[0], start[1] - 1)
    first_move = None
    # The walk is a deterministic cycle; 4 * (h*w) bounds any legal boundary.
    for _ in range(4 * h * w + 8):
        nxt, prev = scan(cur, back)
        if nxt is None:
            break  # isolated pixel
        if first_move is None:
            first_move = nxt
        elif cur == start and nxt == first_move:
            break  # about to retraverse the first edge: cycle complete
        path.append(nxt)
        cur, back = nxt, prev
    else:
        raise RuntimeError("contour trace failed to close")
    if len(path) > 1 and path[-1] == start:
        path.pop()  # closing revisit of the start pixel
    pts = np.array([(c, r) for r, c in path], dtype=np.float64)
    return Contour(pts, frame_w=w, frame_h=h, space=Space.PIXEL)


def extract_contour(img: GrayImage, box: BBox, method: str = "otsu"):
    """Crop and binarize, then trace the largest component's outer border.

    Returns (pixel-space contour or None, component area, crop width, crop height).
    """
    global _extract_calls
    _extract_calls += 1
    sub = crop(img, box)
    comp = max_component(binarize(sub, method))
    area = comp.area
    if area == 0:
        return None, 0, sub.width, sub.height
    return trace_outer_contour(comp), area, sub.width, sub.height


def extract_normalized_contour(img: GrayImage, box: BBox, method: str = "otsu") -> ContourExtraction:
    """Full pipeline with the crop's own dimensions as the normalization frame."""
    contour, area, _, _ = extract_contour(img, box, method)
    if contour is None:
        return ContourExtraction(contour=None, foreground_area=0)
    return ContourExtraction(contour=normalize_contour(contour), foreground_area=area)


def pair_hd(img: GrayImage, box_a: BBox, box_b: BBox, method: str = "otsu",
            normalization: str = "own") -> float:
    """Symmetric normalized Hausdorff distance between two crops' contours.

    ``normalization='own'`` divides each contour by its own crop's size;
    ``'gt'`` divides both by the second crop's size (useful when box_b is the
    ground truth).  Returns +inf when either crop has no foreground.
    """
    ca, _, wa, ha = extract_contour(img, box_a, method)
    cb, _, wb, hb = extract_contour(img, box_b, method)
    return normalized_hd_between(ca, (wa, ha), cb, (wb, hb), normalization)


def normalized_hd_between(ca: Contour | None, dims_a, cb: Contour | None, dims_b,
                          normalization: str = "own") -> float:
    """Normalized HD from already-extracted pixel contours and their crop sizes.

    Under 'gt' normalization both contours share crop b's frame; that can push
    points past 1, so the division happens on raw arrays instead of going
    through Normalized-space contours (whose invariant is [0, 1]).
    """
    if normalization not in ("own", "gt"):
        raise ValueError(f"unknown normalization {normalization!r} (expected 'own' or 'gt')")
    if ca is None or cb is None:
        return math.inf
    div_b = np.array(dims_b, dtype=np.float64)
    div_a = np.array(dims_a, dtype=np.float64) if normalization == "own" else div_b
    return hausdorff_points(ca.points / div_a, cb.points / div_b).symmetric
