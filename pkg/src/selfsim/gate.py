"""Fractal gating of box-regression losses.

Low-IoU predictions whose crop contour is Hausdorff-similar to the ground
truth crop's contour are treated as correct partial detections and their box
loss is clipped to zero.  High-IoU pairs are ordinary positives and are never
contour-tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import BBox, iou
from .losses import ciou_loss, smooth_l1_box_loss
from .mask import GrayImage, pair_hd

PROSE = "prose"
LITERAL = "literal"


@dataclass(frozen=True)
class GateConfig:
    """Gate thresholds and which reading of the gating rule to apply.

    ``prose`` zeroes the loss of similar (fractal) pairs.  ``literal`` keeps
    the printed indicator form, which multiplies the loss by 1 only when the
    pair is similar; it is provided for fidelity experiments.
    """

    th_hd: float = 0.50
    iou_gate: float = 0.50
    semantics: str = PROSE
    binarize: str = "otsu"

    def __post_init__(self):
        if not self.th_hd > 0:
            raise ValueError(f"th_hd must be positive, got {self.th_hd}")
        if not 0 < self.iou_gate < 1:
            raise ValueError(f"iou_gate must be in (0, 1), got {self.iou_gate}")
        if self.semantics not in (PROSE, LITERAL):
            raise ValueError(f"semantics must be '{PROSE}' or '{LITERAL}', got {self.semantics!r}")


@dataclass(frozen=True)
class GateDecision:
    """Outcome of the fractal test for one (pred, gt) pair.

    ``hd`` is None when the pair was never contour-tested (high-IoU bypass)
    and +inf when either crop had no foreground.  ``indicator`` is the
    multiplier the configured semantics applies to the box loss.
    """

    hd: float | None
    threshold: float
    indicator: int
    is_fractal: bool
    iou: float

    def __post_init__(self):
        expect = self.hd is not None and math.isfinite(self.hd) and self.hd <= self.threshold
        if self.is_fractal != expect:
            raise ValueError("is_fractal must hold exactly when hd is finite and <= threshold")
        if self.indicator not in (0, 1):
            raise ValueError("indicator must be 0 or 1")


def _indicator(hd: float | None, iou_val: float, cfg: GateConfig) -> int:
    if iou_val >= cfg.iou_gate:
        return 1  # normal positive: full loss under either semantics
    similar = hd is not None and math.isfinite(hd) and hd <= cfg.th_hd
    if cfg.semantics == PROSE:
        return 0 if similar else 1
    return 1 if similar else 0


def gate_decision(scene: GrayImage, pred: BBox, gt: BBox, cfg: GateConfig = GateConfig()) -> GateDecision:
    """Fractal test: high-IoU pairs bypass, others get a normalized-HD check."""
    j = iou(pred, gt)
    if j >= cfg.iou_gate:
        return GateDecision(hd=None, threshold=cfg.th_hd, indicator=1, is_fractal=False, iou=j)
    hd = pair_hd(scene, pred, gt, method=cfg.binarize)
    fractal = math.isfinite(hd) and hd <= cfg.th_hd
    return GateDecision(hd=hd, threshold=cfg.th_hd, indicator=_indicator(hd, j, cfg),
                        is_fractal=fractal, iou=j)


def gated_ciou_loss(scene: GrayImage, pred: BBox, gt: BBox, cfg: GateConfig = GateConfig()) -> float:
    """Complete-IoU loss with the fractal gate applied."""
    d = gate_decision(scene, pred, gt, cfg)
    return d.indicator * ciou_loss(pred, gt)


def gated_smooth_l1_loss(scene: GrayImage, pred: BBox, gt: BBox, reference: BBox,
                         cfg: GateConfig = GateConfig()) -> float:
    """Smooth-L1 box loss (encoded against ``reference``) with the fractal gate applied."""
    d = gate_decision(scene, pred, gt, cfg)
    return d.indicator * smooth_l1_box_loss(pred, gt, reference)


@dataclass(frozen=True)
class PairRecord:
    """One batch-gating output row (see the pairs file in the CLI layer)."""

    hd: float | None
    indicator: int
    is_fractal: bool
    ciou_loss: float
    gated_ciou_loss: float
    smooth_l1_loss: float
    gated_smooth_l1_loss: float


def gate_pair(scene: GrayImage, pred: BBox, gt: BBox, reference: BBox | None,
              cfg: GateConfig = GateConfig()) -> PairRecord:
    """Evaluate the gate and both loss families once for a (pred, gt) pair.

    ``reference`` defaults to the ground-truth box, which makes the encoded
    ground-truth targets zero and the smooth-L1 loss a pure function of the
    prediction's offsets.
    """
    ref = reference if reference is not None else gt
    d = gate_decision(scene, pred, gt, cfg)
    ciou = ciou_loss(pred, gt)
    sl1 = smooth_l1_box_loss(pred, gt, ref)
    return PairRecord(
        hd=d.hd,
        indicator=d.indicator,
        is_fractal=d.is_fractal,
        ciou_loss=ciou,
        gated_ciou_loss=d.indicator * ciou,
        smooth_l1_loss=sl1,
        gated_smooth_l1_loss=d.indicator * sl1,
    )
