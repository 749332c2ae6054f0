import numpy as np
import pytest

from demokit.gripper import (
    GripperCalib,
    GripperError,
    MarkerDetection,
    distance_from_width,
    impute_series,
    width_from_distance,
    width_from_frame,
    widths_from_frames,
)

CALIB = GripperCalib(d_max_px=200.0, d_min_px=40.0, g_max_mm=80.0, axis_u_px=320.0)


def det(marker_id, u, v=300.0):
    return MarkerDetection(marker_id, (u, v))


class TestWidthLaw:
    def test_d_max_gives_g_max(self):
        assert width_from_distance(CALIB.d_max_px, CALIB) == CALIB.g_max_mm

    def test_d_min_gives_zero(self):
        assert width_from_distance(CALIB.d_min_px, CALIB) == 0.0

    def test_midpoint_linearity(self):
        mid = 0.5 * (CALIB.d_max_px + CALIB.d_min_px)
        assert width_from_distance(mid, CALIB) == pytest.approx(CALIB.g_max_mm / 2)

    def test_clamped_outside_range(self):
        assert width_from_distance(1000.0, CALIB) == CALIB.g_max_mm
        assert width_from_distance(0.0, CALIB) == 0.0

    def test_monotone_over_sweep(self):
        d = np.linspace(0.0, 300.0, 1000)
        w = [width_from_distance(x, CALIB) for x in d]
        assert all(b >= a for a, b in zip(w, w[1:]))
        assert all(0.0 <= x <= CALIB.g_max_mm for x in w)

    def test_inverse_roundtrip(self):
        for w in np.linspace(0, CALIB.g_max_mm, 17):
            assert width_from_distance(distance_from_width(w, CALIB), CALIB) == pytest.approx(w)


class TestWidthFromFrame:
    def test_two_markers(self):
        w, prov = width_from_frame([det(0, 220.0), det(1, 420.0)], CALIB)
        assert prov == "TwoMarkers"
        assert w == pytest.approx(CALIB.g_max_mm)

    def test_single_left_marker_mirrored(self):
        # left marker 40 px left of the axis mirrors to 40 px right: d = 80
        w, prov = width_from_frame([det(0, 280.0)], CALIB)
        assert prov == "Mirrored"
        assert w == pytest.approx(width_from_distance(80.0, CALIB))

    def test_mirror_symmetry(self):
        both = [det(0, 320.0 - 55.0), det(1, 320.0 + 55.0)]
        w_full, _ = width_from_frame(both, CALIB)
        w_left, _ = width_from_frame(both[:1], CALIB)
        w_right, _ = width_from_frame(both[1:], CALIB)
        assert abs(w_left - w_full) < 1e-9
        assert abs(w_right - w_full) < 1e-9

    def test_no_markers_missing(self):
        assert width_from_frame([], CALIB) == (None, None)

    def test_duplicate_ids_error(self):
        with pytest.raises(GripperError):
            width_from_frame([det(0, 100.0), det(0, 200.0)], CALIB)


class TestImpute:
    def test_linear_midpoint(self):
        series = impute_series([(10.0, "TwoMarkers"), (None, None), (20.0, "TwoMarkers")])
        assert series.widths == [10.0, 15.0, 20.0]
        assert series.provenance[1] == "Imputed"

    def test_no_gaps_unchanged(self):
        series = impute_series([(10.0, "TwoMarkers"), (20.0, "Mirrored")])
        assert series.widths == [10.0, 20.0]
        assert series.provenance == ["TwoMarkers", "Mirrored"]

    def test_leading_and_trailing_hold(self):
        series = impute_series([(None, None), (None, None), (30.0, "TwoMarkers"), (None, None)])
        assert series.widths == [30.0, 30.0, 30.0, 30.0]
        assert series.provenance == ["Imputed", "Imputed", "TwoMarkers", "Imputed"]

    def test_all_missing_error(self):
        with pytest.raises(GripperError):
            impute_series([(None, None), (None, None)])

    def test_observed_values_preserved(self, rng):
        raw = []
        for i in range(100):
            if rng.random() < 0.4:
                raw.append((None, None))
            else:
                raw.append((float(rng.uniform(0, 80)), "TwoMarkers"))
        if all(w is None for w, _ in raw):
            raw[0] = (5.0, "TwoMarkers")
        series = impute_series(raw)
        for i, (w, _) in enumerate(raw):
            if w is not None:
                assert series.widths[i] == w


def test_widths_from_frames_end_to_end():
    frames = [
        [det(0, 220.0), det(1, 420.0)],
        [],
        [det(1, 360.0)],
    ]
    series = widths_from_frames(frames, CALIB)
    assert series.provenance == ["TwoMarkers", "Imputed", "Mirrored"]
    assert all(0 <= w <= CALIB.g_max_mm for w in series.widths)


def test_calib_file_roundtrip(tmp_path):
    p = tmp_path / "calib.yaml"
    CALIB.to_file(p)
    assert GripperCalib.from_file(p) == CALIB


def test_invalid_calib():
    with pytest.raises(GripperError):
        GripperCalib(d_max_px=10.0, d_min_px=40.0, g_max_mm=80.0, axis_u_px=0.0)
