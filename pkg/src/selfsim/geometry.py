"""Geometric primitives: points, contours, boxes, IoU and Hausdorff distance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Space(Enum):
    """Coordinate space a contour lives in."""

    PIXEL = "pixel"
    NORMALIZED = "normalized"


@dataclass(frozen=True)
class Point:
    """A finite 2-D point (pixels or normalized units)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True, eq=False)
class Contour:
    """Ordered point set tracing a connected region.

    ``points`` is an (n, 2) float64 array of (x, y) rows, n >= 1.  The frame
    is the width/height of the image the contour was extracted from and is
    the divisor used by :func:`normalize_contour`.
    """

    points: np.ndarray
    frame_w: float
    frame_h: float
    space: Space = Space.PIXEL

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ValueError(f"contour needs an (n, 2) point array with n >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("contour coordinates must be finite")
        if not (self.frame_w > 0 and self.frame_h > 0):
            raise ValueError(f"frame dimensions must be positive, got {self.frame_w}x{self.frame_h}")
        if self.space is Space.NORMALIZED and (pts.min() < 0.0 or pts.max() > 1.0):
            raise ValueError("normalized contour coordinates must lie in [0, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, points, frame_w, frame_h, space=Space.PIXEL) -> "Contour":
        """Build from an iterable of Point or (x, y) pairs."""
        rows = [(p.x, p.y) if isinstance(p, Point) else (p[0], p[1]) for p in points]
        return cls(np.array(rows, dtype=np.float64), frame_w, frame_h, space)

    def to_points(self) -> list[Point]:
        return [Point(float(x), float(y)) for x, y in self.points]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class BBox:
    """Center-based box: (x, y) is the center, w/h the side lengths in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        vals = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"box fields must be finite, got {vals}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box sides must be positive, got w={self.w}, h={self.h}")

    def corners(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max)."""
        return (self.x - self.w / 2, self.y - self.h / 2,
                self.x + self.w / 2, self.y + self.h / 2)

    @classmethod
    def from_corner(cls, x_min, y_min, w, h) -> "BBox":
        """From the corner-based (x_min, y_min, w, h) file convention."""
        return cls(x_min + w / 2, y_min + h / 2, w, h)

    @property
    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class HDResult:
    """Directed and symmetric Hausdorff distances for one contour pair."""

    forward: float
    backward: float
    symmetric: float

    def __post_init__(self):
        if self.forward < 0 or self.backward < 0:
            raise ValueError("directed distances must be >= 0")
        if self.symmetric != max(self.forward, self.backward):
            raise ValueError("symmetric must equal max(forward, backward)")


def iou(a: BBox, b: BBox) -> float:
    """Intersection-over-union of two boxes, in [0, 1]."""
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return inter / union


def _check_same_space(a: Contour, b: Contour) -> None:
    if a.space is not b.space:
        raise ValueError(f"mixed-space contours: {a.space.value} vs {b.space.value}")


# Both kernels compute squared distances with the identical elementwise
# expression so their results are bit-for-bit equal; sqrt is applied once at
# the end (monotone, so the max/min structure is preserved exactly).

def _directed_sq_naive(pa: np.ndarray, pb: np.ndarray) -> float:
    """Full O(n*m) scan: max over rows of pa of the min squared distance to pb."""
    dx = pa[:, 0, None] - pb[None, :, 0]
    dy = pa[:, 1, None] - pb[None, :, 1]
    d2 = dx * dx + dy * dy
    return float(d2.min(axis=1).max())


_EB_CHUNK = 64


def _directed_sq_early_break(pa: np.ndarray, pb: np.ndarray) -> float:
    """Early-break scan: a row is abandoned once its running min cannot raise the max."""
    bx = pb[:, 0]
    by = pb[:, 1]
    m = bx.shape[0]
    cmax = -1.0
    for ax, ay in pa:
        cmin = math.inf
        for start in range(0, m, _EB_CHUNK):
            dx = ax - bx[start:start + _EB_CHUNK]
            dy = ay - by[start:start + _EB_CHUNK]
            d2 = dx * dx + dy * dy
            blk_min = float(d2.min())
            if blk_min < cmin:
                cmin = blk_min
            if cmin <= cmax:
                break
        else:
            if cmin > cmax:
                cmax = cmin
    return cmax


def hausdorff_points(pa, pb, *, naive: bool = False) -> HDResult:
    """Hausdorff distances between two raw (n, 2) point arrays (no space checks)."""
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    if pa.ndim != 2 or pa.shape[1] != 2 or pa.shape[0] < 1:
        raise ValueError(f"need an (n, 2) array with n >= 1, got shape {pa.shape}")
    if pb.ndim != 2 or pb.shape[1] != 2 or pb.shape[0] < 1:
        raise ValueError(f"need an (n, 2) array with n >= 1, got shape {pb.shape}")
    kernel = _directed_sq_naive if naive else _directed_sq_early_break
    fwd = math.sqrt(kernel(pa, pb))
    bwd = math.sqrt(kernel(pb, pa))
    return HDResult(forward=fwd, backward=bwd, symmetric=max(fwd, bwd))


def directed_hausdorff(a: Contour, b: Contour, *, naive: bool = False) -> float:
    """One-way distance h(a, b): the max over a's points of the min distance into b.

    Exactly 0 iff every point of ``a`` occurs in ``b``.  ``naive=True`` selects
    the full-scan reference kernel (the testing oracle for the early-break one).
    """
    _check_same_space(a, b)
    kernel = _directed_sq_naive if naive else _directed_sq_early_break
    return math.sqrt(kernel(a.points, b.points))


def hausdorff(a: Contour, b: Contour, *, naive: bool = False) -> HDResult:
    """Symmetric Hausdorff distance max{h(a,b), h(b,a)} with both directed legs."""
    _check_same_space(a, b)
    kernel = _directed_sq_naive if naive else _directed_sq_early_break
    fwd = math.sqrt(kernel(a.points, b.points))
    bwd = math.sqrt(kernel(b.points, a.points))
    return HDResult(forward=fwd, backward=bwd, symmetric=max(fwd, bwd))


def normalize_contour(c: Contour) -> Contour:
    """Divide x by frame width and y by frame height so coordinates fall in [0, 1].

    Anisotropic for non-square frames by design.  Point count and order are
    preserved; the frame dimensions are kept as metadata on the result.
    """
    if c.space is not Space.PIXEL:
        raise ValueError("normalize_contour expects a pixel-space contour")
    pts = c.points / np.array([c.frame_w, c.frame_h], dtype=np.float64)
    return Contour(pts, c.frame_w, c.frame_h, Space.NORMALIZED)
