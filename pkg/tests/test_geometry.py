import pytest
from hypothesis import given, strategies as st

from scenealert.geometry import (
    CameraCalibration,
    ClassHeightTable,
    GeometryError,
    annotate_detections,
    assign_region,
    estimate_distance,
)
from scenealert.model import BoundingBox, Detection

CALIB = CameraCalibration(focal_px=800.0, frame_width=1920, frame_height=1080)

# Reference detector rows: (class, conf, bbox, expected distance, region).
REFERENCE_ROWS = [
    ("person", 0.89, (1400, 725, 1504, 952), 5.99, "right"),
    ("person", 0.86, (1568, 726, 1635, 933), 6.57, "right"),
    ("car", 0.80, (803, 589, 866, 641), 23.08, "left"),
    ("car", 0.55, (750, 551, 818, 597), 26.09, "left"),
]


@pytest.mark.parametrize("label,_conf,bbox,expected,_region", REFERENCE_ROWS)
def test_reference_distances(label, _conf, bbox, expected, _region):
    height = {"person": 1.7, "car": 1.5}[label]
    got = estimate_distance(800.0, height, BoundingBox(*bbox).height)
    assert got == pytest.approx(expected, abs=0.01)


def test_unit_distance():
    assert estimate_distance(800.0, 1.5, 1200.0) == pytest.approx(1.0)


def test_degenerate_bbox_height_raises():
    with pytest.raises(GeometryError):
        estimate_distance(800.0, 1.7, 0.0)
    with pytest.raises(GeometryError):
        estimate_distance(800.0, 1.7, -5.0)


@pytest.mark.parametrize(
    "bbox,expected",
    [
        ((1400, 725, 1504, 952), "right"),  # centroid 1452
        ((803, 589, 866, 641), "left"),  # centroid 834.5
        ((950, 0, 970, 50), "right"),  # centroid exactly at 960
    ],
)
def test_assign_region(bbox, expected):
    assert assign_region(BoundingBox(*bbox), 1920) == expected


@given(
    focal=st.floats(100, 5000),
    height=st.floats(0.1, 5.0),
    distance=st.floats(0.5, 100.0),
)
def test_distance_round_trip(focal, height, distance):
    bbox_h = focal * height / distance
    back = estimate_distance(focal, height, bbox_h)
    assert abs(back - distance) / distance < 1e-9


@given(
    focal=st.floats(100, 5000),
    height=st.floats(0.1, 5.0),
    h1=st.integers(10, 500),
    h2=st.integers(10, 500),
)
def test_distance_monotone_in_bbox_height(focal, height, h1, h2):
    d1 = estimate_distance(focal, height, h1)
    d2 = estimate_distance(focal, height, h2)
    if h1 < h2:
        assert d1 > d2
    elif h1 > h2:
        assert d1 < d2


@given(focal=st.floats(100, 5000), height=st.floats(0.1, 5.0), bbox_h=st.integers(10, 900))
def test_distance_linear_in_focal_and_height(focal, height, bbox_h):
    base = estimate_distance(focal, height, bbox_h)
    assert estimate_distance(2 * focal, height, bbox_h) == pytest.approx(2 * base)
    assert estimate_distance(focal, 2 * height, bbox_h) == pytest.approx(2 * base)


@given(
    x1=st.integers(0, 1900),
    w=st.integers(1, 200),
    frame_w=st.integers(2, 4000),
)
def test_region_partition_and_mirror(x1, w, frame_w):
    x2 = min(x1 + w, frame_w)
    if x2 <= x1:
        return
    bbox = BoundingBox(x1, 0, x2, 10)
    region = assign_region(bbox, frame_w)
    assert region in ("left", "right")
    mirrored = BoundingBox(frame_w - x2, 0, frame_w - x1, 10)
    mirrored_region = assign_region(mirrored, frame_w)
    if bbox.centroid_x != frame_w / 2:
        assert mirrored_region != region


def test_annotate_reproduces_reference_table():
    detections = [Detection(label, conf, BoundingBox(*bbox)) for label, conf, bbox, *_ in REFERENCE_ROWS]
    annotated = annotate_detections(detections, CALIB)
    got = [(round(d.distance_m, 2), d.region) for d in annotated]
    assert got == [(5.99, "right"), (6.57, "right"), (23.08, "left"), (26.09, "left")]


def test_annotate_empty():
    assert annotate_detections([], CALIB) == []


def test_annotate_tie_break_by_confidence():
    bbox = BoundingBox(100, 100, 200, 300)
    low = Detection("car", 0.5, bbox)
    high = Detection("car", 0.9, bbox)
    annotated = annotate_detections([low, high], CALIB)
    assert [d.confidence for d in annotated] == [0.9, 0.5]


def test_annotate_missing_height_names_class():
    det = Detection("zeppelin", 0.9, BoundingBox(0, 0, 10, 100))
    with pytest.raises(GeometryError, match="zeppelin"):
        annotate_detections([det], CALIB)


@given(
    boxes=st.lists(
        st.tuples(
            st.sampled_from(["person", "car", "bus"]),
            st.floats(0.01, 1.0),
            st.integers(0, 1800),
            st.integers(0, 900),
            st.integers(5, 100),
            st.integers(5, 150),
        ),
        max_size=12,
    )
)
def test_annotate_is_a_permutation(boxes):
    detections = [
        Detection(label, round(conf, 3), BoundingBox(x, y, x + w, y + h))
        for label, conf, x, y, w, h in boxes
    ]
    annotated = annotate_detections(detections, CALIB)
    assert len(annotated) == len(detections)
    stripped = sorted(
        (d.class_label, d.confidence, d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2) for d in annotated
    )
    original = sorted(
        (d.class_label, d.confidence, d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2) for d in detections
    )
    assert stripped == original
    distances = [d.distance_m for d in annotated]
    assert distances == sorted(distances)


def test_height_table_rejects_nonpositive():
    with pytest.raises(GeometryError):
        ClassHeightTable(heights_m={"person": 0.0})
