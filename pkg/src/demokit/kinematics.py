"""Serial revolute chains: URDF-subset parsing, forward kinematics, and
damped-least-squares inverse kinematics with warm starting.

Two chain formats are accepted:

* URDF subset: <robot> with <link> and revolute/continuous <joint>
  elements carrying origin xyz/rpy, axis, and limit lower/upper. Fixed
  joints are folded into the next origin (or the flange offset if
  trailing). Meshes, inertials, and other decorations are ignored.
  Branching trees are rejected.
* Native format: YAML with a `joints` list (name, origin {xyz, rpy},
  axis, limits [lo, hi]) and a `flange_to_gripper` origin.
"""

from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .geometry import (
    Pose,
    quat_conj,
    quat_from_axis_angle,
    quat_mul,
    quat_rotate,
    quat_to_rotvec,
)


class ChainParseError(ValueError):
    pass


class UnsupportedTopologyError(ChainParseError):
    pass


class KinematicsError(ValueError):
    pass


class UnreachableTargetError(KinematicsError):
    def __init__(self, message: str, pos_residual: float, rot_residual: float):
        super().__init__(message)
        self.pos_residual = pos_residual
        self.rot_residual = rot_residual


@dataclass(frozen=True)
class Joint:
    name: str
    origin: Pose       # fixed transform from the parent link frame
    axis: np.ndarray   # unit, in the joint frame
    limits: tuple[float, float]

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        n = np.linalg.norm(axis)
        if abs(n - 1.0) > 1e-9:
            if n == 0.0:
                raise ChainParseError(f"joint {self.name!r}: zero axis")
            axis = axis / n
        object.__setattr__(self, "axis", axis)
        lo, hi = self.limits
        if not lo < hi:
            raise ChainParseError(f"joint {self.name!r}: invalid limits {self.limits}")


@dataclass(frozen=True)
class KinematicChain:
    joints: tuple[Joint, ...]
    flange_to_gripper: Pose

    def __post_init__(self):
        if not self.joints:
            raise ChainParseError("chain has no joints")

    @property
    def dof(self) -> int:
        return len(self.joints)

    def clip_limits(self, theta: np.ndarray) -> np.ndarray:
        lo = np.array([j.limits[0] for j in self.joints])
        hi = np.array([j.limits[1] for j in self.joints])
        return np.clip(theta, lo, hi)

    def check_limits(self, theta) -> None:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dof,):
            raise KinematicsError(f"expected {self.dof} joint values, got {theta.shape}")
        for j, (joint, v) in enumerate(zip(self.joints, theta)):
            lo, hi = joint.limits
            if not (lo - 1e-12 <= v <= hi + 1e-12):
                raise KinematicsError(
                    f"joint {j} ({joint.name!r}) value {v} outside limits [{lo}, {hi}]"
                )


@dataclass(frozen=True)
class IkConfig:
    max_iters: int = 200
    pos_tol_m: float = 1e-6
    rot_tol_rad: float = 1e-6
    damping: float = 1e-3
    step_limit_rad: float = 0.5
    pos_weight: float = 1.0
    rot_weight: float = 1.0
    restarts: int = 4
    restart_scale_rad: float = 0.2


# --- parsing ---------------------------------------------------------------

def _rpy_quat(rpy) -> np.ndarray:
    r, p, y = rpy
    qx = quat_from_axis_angle([1, 0, 0], r)
    qy = quat_from_axis_angle([0, 1, 0], p)
    qz = quat_from_axis_angle([0, 0, 1], y)
    return quat_mul(qz, quat_mul(qy, qx))


def _origin_pose(xyz, rpy) -> Pose:
    return Pose(np.asarray(xyz, dtype=float), _rpy_quat(rpy))


def parse_chain(text: str, skip_unsupported: bool = False) -> KinematicChain:
    """Parse a chain from URDF-subset XML or the native YAML format."""
    stripped = text.lstrip()
    if stripped.startswith("<"):
        return parse_urdf(text, skip_unsupported=skip_unsupported)
    return parse_native(text)


def load_chain(path, skip_unsupported: bool = False) -> KinematicChain:
    return parse_chain(Path(path).read_text(), skip_unsupported=skip_unsupported)


def parse_native(text: str) -> KinematicChain:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ChainParseError(f"native chain format: {e}") from e
    if not isinstance(data, dict) or "joints" not in data:
        raise ChainParseError("native chain format: missing 'joints' list")
    joints = []
    for i, j in enumerate(data["joints"]):
        try:
            origin = j.get("origin", {})
            joints.append(
                Joint(
                    name=j.get("name", f"joint{i}"),
                    origin=_origin_pose(
                        origin.get("xyz", [0, 0, 0]), origin.get("rpy", [0, 0, 0])
                    ),
                    axis=j.get("axis", [0, 0, 1]),
                    limits=tuple(j.get("limits", [-np.pi, np.pi])),
                )
            )
        except (TypeError, KeyError, AttributeError) as e:
            raise ChainParseError(f"native chain format: joint {i}: {e}") from e
    f2g = data.get("flange_to_gripper", {})
    return KinematicChain(
        tuple(joints),
        _origin_pose(f2g.get("xyz", [0, 0, 0]), f2g.get("rpy", [0, 0, 0])),
    )


def _floats(s: str | None, default) -> list[float]:
    if s is None:
        return list(default)
    return [float(v) for v in s.split()]


def parse_urdf(text: str, skip_unsupported: bool = False) -> KinematicChain:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise ChainParseError(f"URDF parse error: {e}") from e
    if root.tag != "robot":
        raise ChainParseError(f"expected <robot> root, got <{root.tag}>")

    links = {l.get("name") for l in root.findall("link")}
    by_parent: dict[str, list[ET.Element]] = {}
    children = set()
    for joint in root.findall("joint"):
        parent = joint.find("parent")
        child = joint.find("child")
        if parent is None or child is None:
            raise ChainParseError(
                f"joint {joint.get('name')!r}: missing parent or child link"
            )
        by_parent.setdefault(parent.get("link"), []).append(joint)
        children.add(child.get("link"))

    roots = [l for l in links if l not in children]
    if len(roots) != 1:
        raise UnsupportedTopologyError(
            f"expected one root link, found {sorted(roots)}"
        )

    joints: list[Joint] = []
    pending = Pose.identity()  # fixed transforms folded into the next joint
    link = roots[0]
    while link in by_parent:
        elems = by_parent[link]
        if len(elems) > 1:
            raise UnsupportedTopologyError(
                f"branching kinematic tree at link {link!r}"
            )
        elem = elems[0]
        jtype = elem.get("type")
        origin_el = elem.find("origin")
        origin = _origin_pose(
            _floats(origin_el.get("xyz") if origin_el is not None else None, [0, 0, 0]),
            _floats(origin_el.get("rpy") if origin_el is not None else None, [0, 0, 0]),
        )
        if jtype in ("revolute", "continuous"):
            axis_el = elem.find("axis")
            limit_el = elem.find("limit")
            if jtype == "revolute" and limit_el is not None:
                limits = (
                    float(limit_el.get("lower", -np.pi)),
                    float(limit_el.get("upper", np.pi)),
                )
            else:
                limits = (-np.pi, np.pi)
            joints.append(
                Joint(
                    name=elem.get("name", f"joint{len(joints)}"),
                    origin=pending.compose(origin),
                    axis=_floats(axis_el.get("xyz") if axis_el is not None else None, [0, 0, 1]),
                    limits=limits,
                )
            )
            pending = Pose.identity()
        elif jtype == "fixed":
            pending = pending.compose(origin)
        else:
            if not skip_unsupported:
                raise UnsupportedTopologyError(
                    f"unsupported joint type {jtype!r} at {elem.get('name')!r}"
                )
            warnings.warn(
                f"skipping unsupported joint {elem.get('name')!r} (type {jtype!r}), "
                f"treated as fixed"
            )
            pending = pending.compose(origin)
        link = elem.find("child").get("link")

    if not joints:
        raise ChainParseError("no revolute joints found")
    return KinematicChain(tuple(joints), pending)


# --- forward kinematics ----------------------------------------------------

def forward(chain: KinematicChain, theta) -> Pose:
    """TCP pose: product of per-joint origin and rotation transforms, then
    the flange-to-gripper offset."""
    chain.check_limits(theta)
    t = Pose.identity()
    for joint, q in zip(chain.joints, np.asarray(theta, dtype=float)):
        t = t.compose(joint.origin).compose(
            Pose(np.zeros(3), quat_from_axis_angle(joint.axis, q))
        )
    return t.compose(chain.flange_to_gripper)


def jacobian(chain: KinematicChain, theta) -> np.ndarray:
    """Geometric Jacobian (6 x dof): rows 0-2 linear, 3-5 angular, both in
    the base frame."""
    theta = np.asarray(theta, dtype=float)
    t = Pose.identity()
    axes, origins = [], []
    for joint, q in zip(chain.joints, theta):
        t = t.compose(joint.origin)
        axes.append(t.rotate(joint.axis))
        origins.append(t.position.copy())
        t = t.compose(Pose(np.zeros(3), quat_from_axis_angle(joint.axis, q)))
    p_ee = t.compose(chain.flange_to_gripper).position
    J = np.zeros((6, chain.dof))
    for j, (z, o) in enumerate(zip(axes, origins)):
        J[:3, j] = np.cross(z, p_ee - o)
        J[3:, j] = z
    return J


def pose_error(target: Pose, current: Pose) -> np.ndarray:
    """Stacked 6-vector error: position difference and the world-frame
    rotation vector taking current to target."""
    e_rot = quat_to_rotvec(quat_mul(target.quat, quat_conj(current.quat)))
    return np.concatenate([target.position - current.position, e_rot])


def _dls_solve(chain, target, theta, cfg):
    """One damped-least-squares descent; returns (theta, pos_res, rot_res)."""
    w = np.concatenate([np.full(3, cfg.pos_weight), np.full(3, cfg.rot_weight)])
    for _ in range(cfg.max_iters):
        fk = forward(chain, theta)
        err = pose_error(target, fk)
        pos_res = float(np.linalg.norm(err[:3]))
        rot_res = float(np.linalg.norm(err[3:]))
        if pos_res <= cfg.pos_tol_m and rot_res <= cfg.rot_tol_rad:
            return theta, pos_res, rot_res
        J = jacobian(chain, theta) * w[:, None]
        if not np.all(np.isfinite(J)):
            raise KinematicsError("NaN in Jacobian")
        e = err * w
        JJt = J @ J.T + (cfg.damping**2) * np.eye(6)
        step = J.T @ np.linalg.solve(JJt, e)
        limit = np.max(np.abs(step))
        if limit > cfg.step_limit_rad:
            step *= cfg.step_limit_rad / limit
        theta = chain.clip_limits(theta + step)
    fk = forward(chain, theta)
    err = pose_error(target, fk)
    return theta, float(np.linalg.norm(err[:3])), float(np.linalg.norm(err[3:]))


def inverse(
    chain: KinematicChain, target: Pose, seed, cfg: IkConfig = IkConfig()
) -> np.ndarray:
    """Damped-least-squares IK from a seed configuration.

    If the descent from the seed stalls (near-singular configurations can
    pin the rotation residual), it is retried from a fixed sequence of
    perturbed seeds, so results stay deterministic."""
    chain.check_limits(seed)
    seed = np.asarray(seed, dtype=float)
    theta, pos_res, rot_res = _dls_solve(chain, target, seed.copy(), cfg)
    if pos_res <= cfg.pos_tol_m and rot_res <= cfg.rot_tol_rad:
        return theta
    rng = np.random.default_rng(0)
    for k in range(cfg.restarts):
        start = chain.clip_limits(
            seed + rng.normal(0.0, cfg.restart_scale_rad * (k + 1), chain.dof)
        )
        cand, p, r = _dls_solve(chain, target, start, cfg)
        if p <= cfg.pos_tol_m and r <= cfg.rot_tol_rad:
            return cand
        if (p, r) < (pos_res, rot_res):
            theta, pos_res, rot_res = cand, p, r
    raise UnreachableTargetError(
        f"IK did not converge after {cfg.max_iters} iterations "
        f"(position residual {pos_res:.3e} m, rotation residual {rot_res:.3e} rad)",
        pos_res,
        rot_res,
    )


def joint_trajectory(
    chain: KinematicChain, tcp_traj, seed0, cfg: IkConfig = IkConfig()
) -> tuple[np.ndarray, float]:
    """Solve IK along a trajectory with warm starts.

    Returns (theta array of shape (T, dof), max per-step joint jump in the
    infinity norm). A failure at frame i raises with that index attached.
    """
    tcp_traj = list(tcp_traj)
    if not tcp_traj:
        raise KinematicsError("empty TCP trajectory")
    thetas = np.zeros((len(tcp_traj), chain.dof))
    seed = np.asarray(seed0, dtype=float)
    max_jump = 0.0
    for i, pose in enumerate(tcp_traj):
        try:
            theta = inverse(chain, pose, seed, cfg)
        except KinematicsError as e:
            raise KinematicsError(f"frame {i}: {e}") from e
        thetas[i] = theta
        if i > 0:
            max_jump = max(max_jump, float(np.max(np.abs(theta - thetas[i - 1]))))
        seed = theta
    return thetas, max_jump


def sample_six_joint_chain() -> KinematicChain:
    """A generic 6-DoF revolute arm used by examples and tests."""
    def j(name, xyz, axis):
        return Joint(name, Pose(np.array(xyz), np.array([0, 0, 0, 1.0])), axis, (-np.pi, np.pi))

    return KinematicChain(
        (
            j("base_yaw", [0, 0, 0.20], [0, 0, 1]),
            j("shoulder", [0, 0, 0.10], [0, 1, 0]),
            j("elbow", [0, 0, 0.30], [0, 1, 0]),
            j("forearm_roll", [0, 0, 0.25], [0, 0, 1]),
            j("wrist_pitch", [0, 0, 0.10], [0, 1, 0]),
            j("wrist_roll", [0, 0, 0.08], [0, 0, 1]),
        ),
        Pose(np.array([0, 0, 0.12]), np.array([0, 0, 0, 1.0])),
    )
