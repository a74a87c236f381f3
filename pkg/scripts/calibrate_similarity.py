#!/usr/bin/env python3
"""Desk-check the self-similarity ground-truth thresholds before freezing tests.

Measures (a) Sierpinski foreground-area ratios against (3/4)**depth,
(b) normalized HD between each top-level sub-triangle crop and the whole
Sierpinski contour, and (c) the HD distribution of random sub-crops of a
solid disk, which should sit clearly above the fractal threshold.
"""

import numpy as np

from selfsim import BBox, GrayImage, gen_sierpinski, pair_hd, sierpinski_regions
from selfsim.synth import _render_solid


def area_ratios():
    print("== sierpinski area ratio vs (3/4)^depth ==")
    for size in (64, 128, 256, 512):
        base = gen_sierpinski(0, size).area
        for depth in range(0, 6):
            if size < 2 ** depth:
                continue
            m = gen_sierpinski(depth, size)
            ratio = m.area / base
            ideal = 0.75 ** depth
            print(f"size={size:4d} depth={depth} ratio={ratio:.4f} ideal={ideal:.4f} "
                  f"rel_err={abs(ratio - ideal) / ideal:.3%}")


def subtriangle_hd():
    print("== sub-triangle crop HD vs whole (depth 5, 512px) ==")
    size = 512
    mask = gen_sierpinski(5, size)
    img = GrayImage(np.where(mask.bits, 255, 0).astype(np.uint8))
    whole = BBox(size / 2, size / 2, size, size)
    for i, sub in enumerate(sierpinski_regions(whole)):
        hd = pair_hd(img, sub, whole)
        print(f"  sub-triangle {i}: hd={hd:.4f}")


def disk_crops(n=200, seed=3):
    print("== random sub-crops of a solid disk vs whole ==")
    size = 256
    img = GrayImage(_render_solid(size, size))
    whole = BBox(size / 2, size / 2, size, size)
    rng = np.random.default_rng(seed)
    hds = []
    for _ in range(n):
        w = rng.uniform(0.2, 0.6) * size
        h = rng.uniform(0.2, 0.6) * size
        cx = rng.uniform(w / 2, size - w / 2)
        cy = rng.uniform(h / 2, size - h / 2)
        hds.append(pair_hd(img, BBox(cx, cy, w, h), whole))
    hds = np.array(hds)
    finite = hds[np.isfinite(hds)]
    print(f"  n={n} inf_count={np.sum(~np.isfinite(hds))} "
          f"median={np.median(hds):.4f} "
          f"finite: min={finite.min():.4f} median={np.median(finite):.4f} max={finite.max():.4f}")


if __name__ == "__main__":
    area_ratios()
    subtriangle_hd()
    disk_crops()
