"""SE(3) pose algebra on position vectors and unit quaternions.

Quaternions are stored as (qx, qy, qz, qw) arrays, normalized and sign
canonicalized (qw >= 0) at construction so that q and -q compare equal.
Rotation-matrix formulas elsewhere in the toolkit are realized as
quaternion actions on vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

_NORM_TOL = 1e-9


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    # a finite sum-of-squares implies every component is finite
    if not math.isfinite(float(a @ a)):
        raise ValueError(f"non-finite vector: {a}")
    return a


def quat_normalize(q) -> np.ndarray:
    """Normalize to unit length and canonicalize the sign (qw >= 0)."""
    a = np.asarray(q, dtype=float).reshape(4)
    n2 = float(a @ a)
    if not math.isfinite(n2):
        raise ValueError(f"non-finite quaternion: {a}")
    if n2 == 0.0:
        raise ValueError("zero quaternion")
    a = a / math.sqrt(n2)
    if a[3] < 0.0:
        a = -a
    return a


def quat_mul(a, b) -> np.ndarray:
    """Hamilton product a*b, both (x, y, z, w)."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array(
        [
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        ]
    )


def quat_conj(q) -> np.ndarray:
    return np.array([-q[0], -q[1], -q[2], q[3]])


def quat_rotate(q, v) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    qv = np.asarray(q[:3], dtype=float)
    w = float(q[3])
    v = np.asarray(v, dtype=float)
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def quat_angle(q) -> float:
    """Rotation angle of q in [0, pi]."""
    w = min(1.0, abs(float(q[3])))
    return 2.0 * float(np.arccos(w))


def quat_distance(a, b) -> float:
    """Sign-insensitive quaternion distance min(|a-b|, |a+b|)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = _as_vec3(axis)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("zero rotation axis")
    half = 0.5 * float(angle)
    return quat_normalize(np.append(np.sin(half) * axis / n, np.cos(half)))


def quat_to_rotvec(q) -> np.ndarray:
    """Axis-angle (rotation vector) of q."""
    q = quat_normalize(q)
    s = np.linalg.norm(q[:3])
    if s < 1e-12:
        return 2.0 * q[:3]
    angle = 2.0 * np.arctan2(s, q[3])
    return angle * q[:3] / s


def slerp(qa, qb, t: float) -> np.ndarray:
    """Spherical-linear interpolation from qa (t=0) to qb (t=1)."""
    qa = quat_normalize(qa)
    qb = quat_normalize(qb)
    dot = float(np.dot(qa, qb))
    if dot < 0.0:
        qb, dot = -qb, -dot
    if dot > 1.0 - 1e-12:
        return quat_normalize(qa + t * (qb - qa))
    theta = np.arccos(min(1.0, dot))
    s = np.sin(theta)
    return quat_normalize(
        np.sin((1.0 - t) * theta) / s * qa + np.sin(t * theta) / s * qb
    )


IDENTITY_QUAT = np.array([0.0, 0.0, 0.0, 1.0])


@dataclass(frozen=True)
class Pose:
    """Rigid transform: position in meters plus unit-quaternion orientation."""

    position: np.ndarray
    quat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position))
        object.__setattr__(self, "quat", quat_normalize(self.quat))

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), IDENTITY_QUAT)

    @staticmethod
    def from_parts(position, axis=None, angle: float = 0.0) -> "Pose":
        q = IDENTITY_QUAT if axis is None else quat_from_axis_angle(axis, angle)
        return Pose(position, q)

    def compose(self, other: "Pose") -> "Pose":
        """self then other: rotate-then-translate convention."""
        return Pose(
            self.position + quat_rotate(self.quat, other.position),
            quat_mul(self.quat, other.quat),
        )

    def inverse(self) -> "Pose":
        qi = quat_conj(self.quat)
        return Pose(-quat_rotate(qi, self.position), qi)

    def rotate(self, v) -> np.ndarray:
        return quat_rotate(self.quat, v)

    def is_close(self, other: "Pose", pos_tol=1e-9, quat_tol=1e-9) -> bool:
        return (
            np.linalg.norm(self.position - other.position) <= pos_tol
            and quat_distance(self.quat, other.quat) <= quat_tol
        )


@dataclass(frozen=True)
class RelativePose:
    """One step between consecutive absolute TCP frames.

    translation is expressed in the base frame; rotation is the local
    orientation increment.
    """

    translation: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "translation", _as_vec3(self.translation))
        object.__setattr__(self, "rotation", quat_normalize(self.rotation))

    @staticmethod
    def identity() -> "RelativePose":
        return RelativePose(np.zeros(3), IDENTITY_QUAT)


def compose(a: Pose, b: Pose) -> Pose:
    return a.compose(b)


def inverse(p: Pose) -> Pose:
    return p.inverse()


def camera_pose_in_base(
    base_gripper: Pose, delta_c2g, tracker: Pose, base_rotation=None
) -> Pose:
    """Absolute camera pose in the robot base frame.

    ``tracker`` is the tracking module's pose relative to its initial pose.
    ``base_rotation`` overrides the rotation used on the orientation side;
    it defaults to the initial gripper orientation.
    """
    delta = _as_vec3(delta_c2g)
    r_base = base_gripper.quat if base_rotation is None else quat_normalize(base_rotation)
    position = (
        base_gripper.position
        + tracker.position
        - quat_rotate(base_gripper.quat, delta)
    )
    return Pose(position, quat_mul(r_base, tracker.quat))


def tcp_from_camera(cam: Pose, delta_c2g) -> Pose:
    """Absolute TCP pose from the camera pose and camera-to-gripper offset."""
    delta = _as_vec3(delta_c2g)
    return Pose(cam.position + quat_rotate(cam.quat, delta), cam.quat)


def tcp_trajectory(
    base_gripper: Pose, delta_c2g, tracker_poses: Iterable[Pose]
) -> list[Pose]:
    """Absolute TCP trajectory from a sequence of tracker poses."""
    return [
        tcp_from_camera(camera_pose_in_base(base_gripper, delta_c2g, t), delta_c2g)
        for t in tracker_poses
    ]


def tracker_from_tcp(base_gripper: Pose, delta_c2g, tcp: Pose) -> Pose:
    """Inverse of the absolute-TCP derivation: tracker pose that yields tcp."""
    delta = _as_vec3(delta_c2g)
    rot = quat_mul(quat_conj(base_gripper.quat), tcp.quat)
    position = (
        tcp.position
        - quat_rotate(tcp.quat, delta)
        - base_gripper.position
        + quat_rotate(base_gripper.quat, delta)
    )
    return Pose(position, rot)


def relative_step(ee_i: Pose, ee_next: Pose) -> RelativePose:
    """Relative transform between consecutive absolute TCP frames."""
    return RelativePose(
        ee_next.position - ee_i.position,
        quat_mul(quat_conj(ee_i.quat), ee_next.quat),
    )


def relative_trajectory(traj: Sequence[Pose]) -> list[RelativePose]:
    return [relative_step(a, b) for a, b in zip(traj, traj[1:])]


def integrate_relative(initial: Pose, steps: Iterable[RelativePose]) -> list[Pose]:
    """Chain relative steps back into an absolute trajectory."""
    out = [initial]
    for s in steps:
        prev = out[-1]
        out.append(
            Pose(prev.position + s.translation, quat_mul(prev.quat, s.rotation))
        )
    return out
