"""Dynamic TCP error compensation for non-parallel-jaw grippers.

As the jaws close, the effective TCP of such grippers translates along
the local Z-axis. The compensation distance is linear in the measured
gripper width; the commanded TCP is shifted by that distance along the
negative local Z-axis before solving IK, keeping the orientation fixed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import Pose, quat_rotate
from .kinematics import IkConfig, KinematicChain, inverse


class CompensationError(ValueError):
    pass


@dataclass(frozen=True)
class CompensationParams:
    d_close_m: float   # max compensation, gripper fully closed
    d_open_m: float    # min compensation, fully open
    w_max_m: float     # maximum jaw opening

    def __post_init__(self):
        if not (self.d_close_m >= self.d_open_m >= 0.0):
            raise CompensationError("require d_close >= d_open >= 0")
        if self.w_max_m <= 0.0:
            raise CompensationError("require w_max > 0")


def compensation_distance(
    w_m: float, params: CompensationParams, strict: bool = False
) -> float:
    """Compensation distance for measured width w; linear between d_close
    (w=0) and d_open (w=w_max). Out-of-range widths are clamped unless
    strict."""
    if w_m < 0.0 or w_m > params.w_max_m:
        if strict:
            raise CompensationError(
                f"width {w_m} outside [0, {params.w_max_m}]"
            )
        warnings.warn(f"width {w_m} outside [0, {params.w_max_m}]; clamping")
        w_m = min(max(w_m, 0.0), params.w_max_m)
    return params.d_close_m - (params.d_close_m - params.d_open_m) / params.w_max_m * w_m


def corrected_tcp(pose: Pose, d_m: float) -> Pose:
    """Shift the TCP by d along the negative local Z-axis; orientation
    unchanged."""
    z_axis = quat_rotate(pose.quat, np.array([0.0, 0.0, 1.0]))
    return Pose(pose.position - d_m * z_axis, pose.quat)


def compensated_joint_command(
    chain: KinematicChain,
    pose: Pose,
    w_m: float,
    params: CompensationParams,
    seed,
    cfg: IkConfig = IkConfig(),
    strict: bool = False,
) -> np.ndarray:
    """Joint vector for the width-compensated TCP target."""
    d = compensation_distance(w_m, params, strict=strict)
    return inverse(chain, corrected_tcp(pose, d), seed, cfg)
