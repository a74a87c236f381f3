"""Box-regression losses: complete-IoU terms and smooth-L1 on encoded offsets."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import BBox, iou


@dataclass(frozen=True)
class CIoUTerms:
    """Ingredients of the complete-IoU loss for one box pair."""

    iou: float
    center_dist_sq: float    # squared distance between box centers, px^2
    enclosing_diag_sq: float  # squared diagonal of the minimal enclosing box, px^2
    nu: float                # aspect-ratio consistency
    alpha: float             # trade-off weight

    def __post_init__(self):
        vals = (self.iou, self.center_dist_sq, self.enclosing_diag_sq, self.nu, self.alpha)
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            raise ValueError(f"CIoU terms must be finite and >= 0, got {vals}")
        if self.center_dist_sq > self.enclosing_diag_sq:
            raise ValueError("center distance cannot exceed the enclosing diagonal")


@dataclass(frozen=True)
class RegressionTarget:
    """Standard R-CNN box parameterization relative to a reference box."""

    tx: float
    ty: float
    tw: float
    th: float

    def __iter__(self):
        yield from (self.tx, self.ty, self.tw, self.th)


def ciou_terms(pred: BBox, gt: BBox) -> CIoUTerms:
    """IoU, squared center distance, squared enclosing diagonal, nu and alpha."""
    j = iou(pred, gt)
    rho_sq = (pred.x - gt.x) ** 2 + (pred.y - gt.y) ** 2
    px0, py0, px1, py1 = pred.corners()
    gx0, gy0, gx1, gy1 = gt.corners()
    cw = max(px1, gx1) - min(px0, gx0)
    ch = max(py1, gy1) - min(py0, gy0)
    c_sq = cw * cw + ch * ch
    nu = (4.0 / math.pi ** 2) * (math.atan(gt.w / gt.h) - math.atan(pred.w / pred.h)) ** 2
    alpha = 0.0 if nu == 0.0 else nu / ((1.0 - j) + nu)  # limit of the trade-off at nu -> 0
    return CIoUTerms(iou=j, center_dist_sq=rho_sq, enclosing_diag_sq=c_sq, nu=nu, alpha=alpha)


def ciou_loss(pred: BBox, gt: BBox) -> float:
    """1 - IoU + rho^2/c^2 + alpha*nu; zero exactly when pred equals gt."""
    t = ciou_terms(pred, gt)
    return (1.0 - t.iou) + t.center_dist_sq / t.enclosing_diag_sq + t.alpha * t.nu


def encode_regression(box: BBox, reference: BBox) -> RegressionTarget:
    """Offsets (x-x_r)/w_r, (y-y_r)/h_r and log-scales ln(w/w_r), ln(h/h_r)."""
    return RegressionTarget(
        tx=(box.x - reference.x) / reference.w,
        ty=(box.y - reference.y) / reference.h,
        tw=math.log(box.w / reference.w),
        th=math.log(box.h / reference.h),
    )


def smooth_l1(x: float) -> float:
    """0.5*x^2 inside |x| < 1, |x| - 0.5 outside; both branches meet at 0.5."""
    if not math.isfinite(x):
        raise ValueError(f"smooth_l1 needs a finite input, got {x}")
    ax = abs(x)
    if ax < 1.0:
        return 0.5 * x * x
    return ax - 0.5


def smooth_l1_box_loss(pred: BBox, gt: BBox, reference: BBox) -> float:
    """Sum of smooth-L1 penalties over the four encoded box parameters."""
    t = encode_regression(pred, reference)
    v = encode_regression(gt, reference)
    return sum(smooth_l1(ti - vi) for ti, vi in zip(t, v))
