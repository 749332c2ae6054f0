"""Synthetic ground-truth trajectories and sensor-stream logs.

This is the test oracle for the whole pipeline: it produces the exact
pose/camera log formats the sync module consumes, from a known TCP
trajectory, a known width profile, and a seeded noise model, so every
downstream stage can be checked against the generating truth.

Positional noise is sampled as a uniformly random direction scaled by a
zero-mean Gaussian magnitude, so pos_sigma_m is the standard deviation of
the radial error (and the expected RMSE of a noisy recovered trajectory).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .geometry import (
    Pose,
    quat_from_axis_angle,
    quat_mul,
    slerp,
    tracker_from_tcp,
)
from .gripper import GripperCalib, distance_from_width
from .quality import ConfidenceLevel
from .sync import (
    CameraSample,
    PoseSample,
    StreamRecord,
    format_camera_record,
    format_pose_record,
)


class SimSpecError(ValueError):
    pass


@dataclass(frozen=True)
class TrajectorySpec:
    waypoints: tuple[Pose, ...]
    duration_s: float
    profile: str = "MinJerk"  # MinJerk | Linear

    def __post_init__(self):
        if len(self.waypoints) < 2:
            raise SimSpecError("need at least 2 waypoints")
        if self.duration_s <= 0:
            raise SimSpecError("duration must be positive")
        if self.profile not in ("MinJerk", "Linear"):
            raise SimSpecError(f"unknown profile {self.profile!r}")


@dataclass(frozen=True)
class NoiseModel:
    pos_sigma_m: float = 0.0
    rot_sigma_rad: float = 0.0
    drift_walk_sigma_m: float = 0.0       # random-walk position bias per step
    confidence_drop_prob: float = 0.0     # per-sample probability of a drop run
    confidence_drop_mean_len: float = 5.0
    snap_back: bool = False               # zero drift near the reference pose
    snap_back_radius_m: float = 0.02
    marker_dropout_prob: float = 0.0


@dataclass(frozen=True)
class WidthProfile:
    """Gripper width over time, in mm."""

    kind: str = "constant"  # constant | sinusoid
    value_mm: float = 50.0
    min_mm: float = 10.0
    max_mm: float = 70.0
    period_s: float = 2.0

    def eval(self, t: float) -> float:
        if self.kind == "constant":
            return self.value_mm
        if self.kind == "sinusoid":
            mid = 0.5 * (self.min_mm + self.max_mm)
            amp = 0.5 * (self.max_mm - self.min_mm)
            return mid + amp * math.sin(2.0 * math.pi * t / self.period_s)
        raise SimSpecError(f"unknown width profile {self.kind!r}")


def _minjerk_s(tau: float) -> float:
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def generate_truth(spec: TrajectorySpec, rate_hz: int) -> list[tuple[float, Pose]]:
    """Sample the waypoint trajectory on a uniform grid.

    Segments get equal time shares. The MinJerk profile has zero boundary
    velocity and acceleration per segment; orientation is slerped with the
    same time-scaling."""
    n_seg = len(spec.waypoints) - 1
    seg_t = spec.duration_s / n_seg
    n = round(spec.duration_s * rate_hz)
    out = []
    for i in range(n + 1):
        t = i / rate_hz
        k = min(int(t / seg_t), n_seg - 1)
        tau = min(max((t - k * seg_t) / seg_t, 0.0), 1.0)
        s = _minjerk_s(tau) if spec.profile == "MinJerk" else tau
        a, b = spec.waypoints[k], spec.waypoints[k + 1]
        out.append(
            (
                t,
                Pose(
                    (1.0 - s) * a.position + s * b.position,
                    slerp(a.quat, b.quat, s),
                ),
            )
        )
    return out


def _pose_at(truth: list[tuple[float, Pose]], t: float) -> Pose:
    """Truth pose at time t; exact when t lies on the (uniform) truth grid,
    interpolated otherwise. O(1) via the grid rate."""
    n = len(truth)
    if n == 1:
        return truth[0][1]
    t0 = truth[0][0]
    rate = (n - 1) / (truth[-1][0] - t0)
    i = min(max(int(round((t - t0) * rate)), 0), n - 1)
    if abs(truth[i][0] - t) <= 1e-9:
        return truth[i][1]
    # off-grid: linear/slerp between the bracketing samples
    j = min(max(int(math.floor((t - t0) * rate)), 0), n - 2)
    while j > 0 and truth[j][0] > t:
        j -= 1
    while j < n - 2 and truth[j + 1][0] <= t:
        j += 1
    a, b = truth[j], truth[j + 1]
    u = (t - a[0]) / (b[0] - a[0])
    return Pose(
        (1.0 - u) * a[1].position + u * b[1].position, slerp(a[1].quat, b[1].quat, u)
    )


def sample_streams(
    truth: list[tuple[float, Pose]],
    pose_rate_hz: int = 200,
    cam_rate_hz: int = 60,
    noise: NoiseModel = NoiseModel(),
    calib: GripperCalib | None = None,
    width: WidthProfile = WidthProfile(),
    seed: int = 0,
    base_gripper: Pose | None = None,
    delta_c2g=(0.0, 0.0, 0.0),
) -> tuple[list[StreamRecord], list[StreamRecord]]:
    """Produce tracker-pose and camera stream records from a TCP truth
    trajectory.

    The tracker log holds the tracking module's motion relative to its
    initial pose, back-derived from the TCP truth given the initial
    gripper pose and the camera-to-gripper offset, then corrupted per the
    noise model."""
    if not truth:
        raise SimSpecError("empty truth trajectory")
    rng = np.random.default_rng(seed)
    if base_gripper is None:
        base_gripper = truth[0][1]
    t_end = truth[-1][0]
    marker_v = 300.0

    pose_records: list[StreamRecord] = []
    drift = np.zeros(3)
    drop_remaining = 0
    n_pose = int(math.floor(t_end * pose_rate_hz + 1e-9))
    for i in range(n_pose + 1):
        t = i / pose_rate_hz
        tcp = _pose_at(truth, t)
        tracker = tracker_from_tcp(base_gripper, delta_c2g, tcp)
        if noise.drift_walk_sigma_m > 0:
            drift = drift + rng.normal(0.0, noise.drift_walk_sigma_m, 3)
            if noise.snap_back and (
                np.linalg.norm(tracker.position) <= noise.snap_back_radius_m
            ):
                drift = np.zeros(3)
        pos = tracker.position + drift
        if noise.pos_sigma_m > 0:
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            pos = pos + direction * rng.normal(0.0, noise.pos_sigma_m)
        quat = tracker.quat
        if noise.rot_sigma_rad > 0:
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            quat = quat_mul(
                quat_from_axis_angle(axis, rng.normal(0.0, noise.rot_sigma_rad)), quat
            )
        if drop_remaining > 0 and i < n_pose:
            conf = ConfidenceLevel.LOW
            drop_remaining -= 1
        elif (
            noise.confidence_drop_prob > 0
            and 0 < i < n_pose
            and rng.random() < noise.confidence_drop_prob
        ):
            conf = ConfidenceLevel.LOW
            drop_remaining = rng.geometric(
                1.0 / max(noise.confidence_drop_mean_len, 1.0)
            ) - 1
        else:
            conf = ConfidenceLevel.HIGH
        pose_records.append(
            StreamRecord(t, PoseSample(Pose(pos, quat), conf))
        )

    camera_records: list[StreamRecord] = []
    n_cam = int(math.floor(t_end * cam_rate_hz + 1e-9))
    for j in range(n_cam + 1):
        t = j / cam_rate_hz
        detections = []
        if calib is not None:
            w = min(max(width.eval(t), 0.0), calib.g_max_mm)
            d = distance_from_width(w, calib)
            centers = [
                (calib.left_id, (calib.axis_u_px - 0.5 * d, marker_v)),
                (calib.right_id, (calib.axis_u_px + 0.5 * d, marker_v)),
            ]
            from .gripper import MarkerDetection

            for marker_id, center in centers:
                if noise.marker_dropout_prob > 0 and rng.random() < noise.marker_dropout_prob:
                    continue
                detections.append(MarkerDetection(marker_id, center))
        camera_records.append(
            StreamRecord(t, CameraSample(j, f"frame_{j:06d}.jpg", tuple(detections)))
        )
    return pose_records, camera_records


def write_logs(pose_records, camera_records, pose_path, camera_path) -> None:
    Path(pose_path).write_text(
        "\n".join(format_pose_record(r) for r in pose_records) + "\n"
    )
    Path(camera_path).write_text(
        "\n".join(format_camera_record(r) for r in camera_records) + "\n"
    )


def write_truth(truth: list[tuple[float, Pose]], path) -> None:
    lines = []
    for t, p in truth:
        fields = [t, *p.position, *p.quat]
        lines.append(" ".join(f"{v:.15f}" for v in fields))
    Path(path).write_text("\n".join(lines) + "\n")


def load_truth(path) -> list[tuple[float, Pose]]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        vals = [float(v) for v in line.split()]
        if len(vals) != 8:
            raise SimSpecError(f"truth line {lineno}: expected 8 fields")
        out.append((vals[0], Pose(vals[1:4], vals[4:8])))
    return out


def truth_at_ticks(truth, tick_times) -> list[Pose]:
    return [_pose_at(truth, t) for t in tick_times]


# --- generator spec files --------------------------------------------------

def load_spec_file(path) -> dict:
    """Load a generator spec: trajectory, rates, noise, width profile, and
    optional gripper calibration."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise SimSpecError(f"{path}: {e}") from e
    if not isinstance(data, dict) or "waypoints" not in data:
        raise SimSpecError(f"{path}: missing 'waypoints'")
    waypoints = []
    for i, row in enumerate(data["waypoints"]):
        vals = [float(v) for v in row]
        if len(vals) == 3:
            waypoints.append(Pose(vals, [0, 0, 0, 1.0]))
        elif len(vals) == 7:
            waypoints.append(Pose(vals[:3], vals[3:]))
        else:
            raise SimSpecError(f"{path}: waypoint {i} must have 3 or 7 values")
    spec = TrajectorySpec(
        waypoints=tuple(waypoints),
        duration_s=float(data.get("duration_s", 5.0)),
        profile=data.get("profile", "MinJerk"),
    )
    noise = NoiseModel(**data.get("noise", {}))
    width = WidthProfile(**data.get("width", {}))
    calib = GripperCalib(**data["gripper_calib"]) if "gripper_calib" in data else None
    return {
        "spec": spec,
        "noise": noise,
        "width": width,
        "calib": calib,
        "pose_rate_hz": int(data.get("pose_rate_hz", 200)),
        "cam_rate_hz": int(data.get("cam_rate_hz", 60)),
        "delta_c2g": [float(v) for v in data.get("delta_c2g", [0.0, 0.0, 0.0])],
    }
