"""Marker-distance to gripper-width mapping, single-marker mirroring, and
gap imputation.

The width law is linear in the pixel distance d between the two fingertip
markers, normalized between the calibrated fully-open (d_max) and
fully-closed (d_min) distances and scaled by the jaws' maximum physical
opening. Distances outside [d_min, d_max] are clamped to the physical jaw
range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import yaml


class GripperError(ValueError):
    pass


@dataclass(frozen=True)
class MarkerDetection:
    marker_id: int
    center_px: tuple[float, float]  # (u, v)

    def __post_init__(self):
        u, v = self.center_px
        if not (math.isfinite(u) and math.isfinite(v)) or u < 0 or v < 0:
            raise GripperError(f"invalid marker center: {self.center_px}")


@dataclass(frozen=True)
class GripperCalib:
    d_max_px: float
    d_min_px: float
    g_max_mm: float
    axis_u_px: float
    left_id: int = 0
    right_id: int = 1

    def __post_init__(self):
        if not (self.d_max_px > self.d_min_px >= 0.0):
            raise GripperError("require d_max_px > d_min_px >= 0")
        if self.g_max_mm <= 0.0:
            raise GripperError("require g_max_mm > 0")

    @staticmethod
    def from_file(path) -> "GripperCalib":
        with open(path) as f:
            data = yaml.safe_load(f)
        return GripperCalib(**data)

    def to_file(self, path) -> None:
        with open(path, "w") as f:
            yaml.safe_dump(
                {
                    "d_max_px": float(self.d_max_px),
                    "d_min_px": float(self.d_min_px),
                    "g_max_mm": float(self.g_max_mm),
                    "axis_u_px": float(self.axis_u_px),
                    "left_id": int(self.left_id),
                    "right_id": int(self.right_id),
                },
                f,
            )


@dataclass
class WidthSeries:
    widths: list[float]          # mm
    provenance: list[str]        # TwoMarkers | Mirrored | Imputed


def width_from_distance(d_px: float, calib: GripperCalib) -> float:
    """Linear map from pixel distance to physical width, clamped to the
    jaw range."""
    frac = (d_px - calib.d_min_px) / (calib.d_max_px - calib.d_min_px)
    return min(max(frac, 0.0), 1.0) * calib.g_max_mm


def distance_from_width(width_mm: float, calib: GripperCalib) -> float:
    """Inverse of the width law (used by the synthetic stream generator)."""
    frac = width_mm / calib.g_max_mm
    return calib.d_min_px + frac * (calib.d_max_px - calib.d_min_px)


def width_from_frame(
    detections: Sequence[MarkerDetection], calib: GripperCalib
) -> tuple[float | None, str | None]:
    """Width for a single frame.

    Two markers: direct pixel distance. One marker: mirror it across the
    vertical image line u = axis_u_px and use the mirrored pair. None:
    missing (to be imputed later). Returns (width_mm or None, provenance).
    """
    ids = [d.marker_id for d in detections]
    if len(ids) != len(set(ids)):
        raise GripperError(f"duplicate marker ids in frame: {ids}")
    known = {d.marker_id: d for d in detections if d.marker_id in (calib.left_id, calib.right_id)}
    if calib.left_id in known and calib.right_id in known:
        a = np.asarray(known[calib.left_id].center_px)
        b = np.asarray(known[calib.right_id].center_px)
        return width_from_distance(float(np.linalg.norm(a - b)), calib), "TwoMarkers"
    if len(known) == 1:
        (det,) = known.values()
        u, v = det.center_px
        mirrored = (2.0 * calib.axis_u_px - u, v)
        d = math.hypot(u - mirrored[0], v - mirrored[1])
        return width_from_distance(d, calib), "Mirrored"
    return None, None


def impute_series(
    raw: Sequence[tuple[float | None, str | None]],
) -> WidthSeries:
    """Fill missing widths: linear interpolation for interior gaps,
    nearest-value hold for leading/trailing gaps."""
    raw = list(raw)
    observed = [i for i, (w, _) in enumerate(raw) if w is not None]
    if not observed:
        raise GripperError("all widths missing; nothing to impute from")
    widths: list[float] = [0.0] * len(raw)
    prov: list[str] = [""] * len(raw)
    for i, (w, p) in enumerate(raw):
        if w is not None:
            widths[i], prov[i] = w, p
    first, last = observed[0], observed[-1]
    for i in range(first):
        widths[i], prov[i] = widths[first], "Imputed"
    for i in range(last + 1, len(raw)):
        widths[i], prov[i] = widths[last], "Imputed"
    for a, b in zip(observed, observed[1:]):
        for i in range(a + 1, b):
            u = (i - a) / (b - a)
            widths[i] = (1.0 - u) * widths[a] + u * widths[b]
            prov[i] = "Imputed"
    return WidthSeries(widths, prov)


def widths_from_frames(
    frames_detections: Sequence[Sequence[MarkerDetection]], calib: GripperCalib
) -> WidthSeries:
    """Per-frame width extraction followed by gap imputation."""
    return impute_series([width_from_frame(d, calib) for d in frames_detections])
