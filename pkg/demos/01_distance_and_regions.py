#!/usr/bin/env python3
"""Pinhole distance estimation walkthrough.

An object of known real-world height H that spans h pixels in the image
sits roughly at f*H/h metres (f = focal length in pixels). Run:

    python demos/01_distance_and_regions.py
"""

from scenealert import BoundingBox, CameraCalibration, Detection, annotate_detections
from scenealert.geometry import estimate_distance

calib = CameraCalibration(focal_px=800.0, frame_width=1920, frame_height=1080)

print("A 1.7 m pedestrian whose box is 227 px tall:")
print(f"  d = 800 * 1.7 / 227 = {estimate_distance(800, 1.7, 227):.2f} m\n")

detections = [
    Detection("person", 0.89, BoundingBox(1400, 725, 1504, 952)),
    Detection("person", 0.86, BoundingBox(1568, 726, 1635, 933)),
    Detection("car", 0.80, BoundingBox(803, 589, 866, 641)),
    Detection("car", 0.55, BoundingBox(750, 551, 818, 597)),
]

print("Annotating a full detection set (sorted nearest first):")
for det in annotate_detections(detections, calib):
    print(
        f"  {det.class_label:<7} conf {det.confidence:.2f}  "
        f"dist {det.distance_m:6.2f} m  region {det.region}"
    )

print("\nRegion = which half of the frame holds the box centroid;")
print("a centroid exactly on the midline counts as right.")
