#!/usr/bin/env python3
"""Build a small label map, compute exact per-side coverage, and show
the rows a prompt would carry.

Coverage fractions are exact rationals of pixel counts; percentages
appear only when rendered.
"""

import numpy as np

from scenealert.segstats import LabelMap, coverage, summarize_for_prompt

CLASSES = {0: "road", 1: "sidewalk", 2: "vegetation", 3: "building"}

# 8x4 frame: road in the lower half, a sidewalk strip on the right,
# vegetation top-left, building top-right.
cells = np.array(
    [
        [2, 2, 2, 3, 3, 3, 3, 3],
        [2, 2, 0, 0, 0, 1, 1, 3],
        [0, 0, 0, 0, 0, 0, 1, 1],
        [0, 0, 0, 0, 0, 0, 0, 0],
    ],
    dtype=np.uint8,
)
label_map = LabelMap(width=8, height=4, cells=cells, class_names=CLASSES)

summary = coverage(label_map)
print(f"road (global): {float(summary.road_global_fraction) * 100:.2f}%")
for stat in summary.stats:
    print(
        f"{stat.class_label:<11} left {float(stat.left_fraction) * 100:6.2f}%  "
        f"right {float(stat.right_fraction) * 100:6.2f}%  "
        f"present L/R = {stat.present_left}/{stat.present_right}"
    )

print("\nprompt rows (canonical order, sidewalk always present):")
for label, value in summarize_for_prompt(summary):
    print(f"  {label} {value}")
