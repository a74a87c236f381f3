"""Detection scoring: AP50, the self-similar AP-ss variant, recall and mAP.

Under AP-ss a low-IoU prediction still counts as a true positive when the
normalized Hausdorff distance between its crop contour and a ground-truth
crop contour is below the threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .geometry import BBox, hausdorff_points, iou
from .mask import extract_contour

AP50 = "ap50"
APSS = "apss"


@dataclass(frozen=True)
class Detection:
    image_id: int
    class_id: int
    box: BBox
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class GroundTruth:
    image_id: int
    class_id: int
    box: BBox


@dataclass(frozen=True)
class ImageInfo:
    id: int
    file: str
    width: int
    height: int


@dataclass(frozen=True)
class Category:
    id: int
    name: str
    self_similar: bool = False


@dataclass(frozen=True)
class Dataset:
    images: tuple[ImageInfo, ...]
    gts: tuple[GroundTruth, ...]
    categories: tuple[Category, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "gts", tuple(self.gts))
        object.__setattr__(self, "categories", tuple(self.categories))


@dataclass(frozen=True)
class EvalConfig:
    mode: str = AP50
    iou_thresh: float = 0.50
    th_hd: float = 0.50
    normalization: str = "own"  # own-crop or gt-crop contour scaling
    binarize: str = "otsu"

    def __post_init__(self):
        if self.mode not in (AP50, APSS):
            raise ValueError(f"mode must be '{AP50}' or '{APSS}', got {self.mode!r}")
        if not (self.iou_thresh > 0 and self.th_hd > 0):
            raise ValueError("thresholds must be positive")


@dataclass(frozen=True)
class ClassReport:
    class_id: int
    name: str
    n_gt: int
    tp: int
    fp: int
    fn: int
    ap: float
    recall: float
    curve: tuple[tuple[float, float], ...]  # (recall, precision) per rank


@dataclass(frozen=True)
class EvalReport:
    mode: str
    per_class: dict[int, ClassReport]
    map: float
    recall: float
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "map": self.map,
            "recall": self.recall,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "per_class": {
                str(cid): {
                    "name": r.name,
                    "n_gt": r.n_gt,
                    "tp": r.tp,
                    "fp": r.fp,
                    "fn": r.fn,
                    "ap": r.ap,
                    "recall": r.recall,
                    "curve": [[rc, pr] for rc, pr in r.curve],
                }
                for cid, r in sorted(self.per_class.items())
            },
        }


class ContourCache:
    """Extraction cache keyed by (image_id, exact box, binarize method).

    Entries hold the pixel-space contour and crop size, so any normalization
    mode can be derived from a hit bit-identically to recomputation.  May be
    persisted as JSON (floats survive exactly via repr round-tripping).
    """

    def __init__(self):
        self._store: dict = {}

    @staticmethod
    def _key(image_id, box: BBox, method: str):
        return (image_id, repr(box.x), repr(box.y), repr(box.w), repr(box.h), method)

    def __len__(self) -> int:
        return len(self._store)

    def extract(self, image_id, box: BBox, method: str, provider=None):
        """(pixel contour points array or None, area, crop_w, crop_h)."""
        key = self._key(image_id, box, method)
        hit = self._store.get(key)
        if hit is None:
            if provider is None:
                raise ValueError("images required for AP-ss")
            contour, area, w, h = extract_contour(provider(image_id), box, method)
            pts = None if contour is None else contour.points
            hit = (pts, area, w, h)
            self._store[key] = hit
        return hit

    def save(self, path) -> None:
        entries = []
        for (image_id, x, y, w, h, method), (pts, area, cw, ch) in self._store.items():
            entries.append({
                "image_id": image_id, "box": [x, y, w, h], "method": method,
                "points": None if pts is None else [[px, py] for px, py in pts],
                "area": area, "crop_w": cw, "crop_h": ch,
            })
        with open(path, "w") as f:
            json.dump({"entries": entries}, f)

    @classmethod
    def load(cls, path) -> "ContourCache":
        with open(path) as f:
            data = json.load(f)
        cache = cls()
        for e in data["entries"]:
            key = (e["image_id"], e["box"][0], e["box"][1], e["box"][2], e["box"][3], e["method"])
            pts = None if e["points"] is None else np.array(e["points"], dtype=np.float64)
            cache._store[key] = (pts, e["area"], e["crop_w"], e["crop_h"])
        return cache


def _pair_hd(cache: ContourCache, image_id, det_box, gt_box, cfg: EvalConfig, provider):
    pa, _, wa, ha = cache.extract(image_id, det_box, cfg.binarize, provider)
    pb, _, wb, hb = cache.extract(image_id, gt_box, cfg.binarize, provider)
    if pa is None or pb is None:
        return math.inf
    div_b = np.array([wb, hb], dtype=np.float64)
    div_a = np.array([wa, ha], dtype=np.float64) if cfg.normalization == "own" else div_b
    return hausdorff_points(pa / div_a, pb / div_b).symmetric


def match_detections(dets, gts, cfg: EvalConfig, image_provider=None, cache: ContourCache | None = None):
    """Greedy one-to-one matching in descending score order.

    Returns (tp_labels aligned to dets, matched flags aligned to gts).  A
    detection is eligible for a same-class same-image ground truth when its
    IoU clears the threshold, or, in AP-ss mode, when the normalized HD
    between the two crop contours does.  IoU-qualified candidates outrank
    HD-only ones; ties fall to max IoU, then min HD, then lowest GT index.
    """
    if cfg.mode == APSS and image_provider is None and cache is None:
        raise ValueError("images required for AP-ss")
    if cache is None:
        cache = ContourCache()

    by_group_gt: dict = {}
    for gi, gt in enumerate(gts):
        by_group_gt.setdefault((gt.image_id, gt.class_id), []).append(gi)

    labels = [False] * len(dets)
    matched = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    for di in order:
        det = dets[di]
        group = by_group_gt.get((det.image_id, det.class_id))
        if not group:
            continue
        cands = []  # (gi, iou, iou_ok, hd or None)
        for gi in group:
            if matched[gi]:
                continue
            j = iou(det.box, gts[gi].box)
            if j >= cfg.iou_thresh:
                cands.append((gi, j, True, None))
            elif cfg.mode == APSS:
                hd = _pair_hd(cache, det.image_id, det.box, gts[gi].box, cfg, image_provider)
                if math.isfinite(hd) and hd <= cfg.th_hd:
                    cands.append((gi, j, False, hd))
        if not cands:
            continue
        qualified = [c for c in cands if c[2]]
        pool = qualified if qualified else cands
        best_iou = max(c[1] for c in pool)
        pool = [c for c in pool if c[1] == best_iou]
        if len(pool) > 1 and cfg.mode == APSS:
            with_hd = []
            for gi, j, ok, hd in pool:
                if hd is None:
                    hd = _pair_hd(cache, det.image_id, det.box, gts[gi].box, cfg, image_provider)
                with_hd.append((gi, j, ok, hd))
            best_hd = min(c[3] for c in with_hd)
            pool = [c for c in with_hd if c[3] == best_hd]
        gi = min(c[0] for c in pool)
        matched[gi] = True
        labels[di] = True
    return labels, matched


def pr_curve(labels, n_gt: int):
    """Cumulative (recall, precision) at each rank of a TP/FP sequence."""
    if n_gt < 0:
        raise ValueError("n_gt must be >= 0")
    out = []
    tp = 0
    for i, is_tp in enumerate(labels, start=1):
        tp += bool(is_tp)
        recall = tp / n_gt if n_gt > 0 else 0.0
        out.append((recall, tp / i))
    return out


def average_precision(curve) -> float:
    """Area under the monotone precision envelope (all-point interpolation)."""
    if not curve:
        return 0.0
    recalls = [r for r, _ in curve]
    env = [0.0] * len(curve)
    running = 0.0
    for i in range(len(curve) - 1, -1, -1):
        running = max(running, curve[i][1])
        env[i] = running
    ap = 0.0
    prev_r = 0.0
    for i, r in enumerate(recalls):
        if r > prev_r:
            ap += (r - prev_r) * env[i]
            prev_r = r
    return ap


def evaluate(dataset: Dataset, dets, cfg: EvalConfig,
             image_provider=None, cache: ContourCache | None = None) -> EvalReport:
    """Per-class AP, mAP over classes with ground truth, recall and counts."""
    image_ids = {im.id for im in dataset.images}
    class_ids = {c.id for c in dataset.categories}
    bad_img = sorted({d.image_id for d in dets if d.image_id not in image_ids})
    bad_cls = sorted({d.class_id for d in dets if d.class_id not in class_ids})
    bad_gt_img = sorted({g.image_id for g in dataset.gts if g.image_id not in image_ids})
    bad_gt_cls = sorted({g.class_id for g in dataset.gts if g.class_id not in class_ids})
    if bad_img or bad_cls or bad_gt_img or bad_gt_cls:
        raise ValueError(
            "unknown identifiers: "
            f"detection image ids {bad_img}, detection class ids {bad_cls}, "
            f"ground-truth image ids {bad_gt_img}, ground-truth class ids {bad_gt_cls}")

    labels, matched = match_detections(dets, dataset.gts, cfg, image_provider, cache)

    names = {c.id: c.name for c in dataset.categories}
    per_class: dict[int, ClassReport] = {}
    gt_count: dict[int, int] = {}
    for g in dataset.gts:
        gt_count[g.class_id] = gt_count.get(g.class_id, 0) + 1
    det_classes = {d.class_id for d in dets}

    total_tp = total_fp = total_gt = 0
    aps = []
    for cid in sorted(set(gt_count) | det_classes):
        idxs = sorted((i for i in range(len(dets)) if dets[i].class_id == cid),
                      key=lambda i: (-dets[i].score, i))
        cls_labels = [labels[i] for i in idxs]
        n_gt = gt_count.get(cid, 0)
        curve = pr_curve(cls_labels, n_gt)
        ap = average_precision(curve)
        tp = sum(cls_labels)
        fp = len(cls_labels) - tp
        fn = n_gt - tp
        recall = tp / n_gt if n_gt > 0 else 0.0
        per_class[cid] = ClassReport(class_id=cid, name=names.get(cid, str(cid)), n_gt=n_gt,
                                     tp=tp, fp=fp, fn=fn, ap=ap, recall=recall,
                                     curve=tuple(curve))
        total_tp += tp
        total_fp += fp
        total_gt += n_gt
        if n_gt > 0:
            aps.append(ap)
    return EvalReport(
        mode=cfg.mode,
        per_class=per_class,
        map=sum(aps) / len(aps) if aps else 0.0,
        recall=total_tp / total_gt if total_gt > 0 else 0.0,
        tp=total_tp,
        fp=total_fp,
        fn=total_gt - total_tp,
    )
