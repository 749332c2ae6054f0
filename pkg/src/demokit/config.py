"""Pipeline configuration file loading (YAML)."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .compensation import CompensationParams
from .geometry import Pose
from .gripper import GripperCalib
from .kinematics import IkConfig
from .quality import QualityThresholds
from .sync import SyncConfig


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    base_gripper: Pose
    delta_c2g: np.ndarray
    sync: SyncConfig = field(default_factory=SyncConfig)
    quality: QualityThresholds = field(default_factory=QualityThresholds)
    strict_smoothness: bool = True
    max_violations: int = 0
    gripper_calib: GripperCalib | None = None
    chain_file: str | None = None
    mode: str = "TcpAbsolute"
    compensation: CompensationParams | None = None
    ik: IkConfig = field(default_factory=IkConfig)
    seed_joints: list[float] | None = None
    drift_align_tol_m: float = 0.01
    drift_closure_tol_m: float = 0.02
    sim: bool = False
    camera_name: str = "wrist_cam"
    digest: str = ""


def _pose_from_row(row, what: str) -> Pose:
    vals = [float(v) for v in row]
    if len(vals) == 3:
        return Pose(vals, [0, 0, 0, 1.0])
    if len(vals) == 7:
        return Pose(vals[:3], vals[3:])
    raise ConfigError(f"{what}: expected 3 or 7 values, got {len(vals)}")


def load_pipeline_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = path.read_bytes()
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    try:
        base_gripper = _pose_from_row(data.get("base_gripper", [0, 0, 0]), "base_gripper")
        delta = np.asarray(data.get("delta_c2g", [0, 0, 0]), dtype=float).reshape(3)
        calib_val = data.get("gripper_calib")
        if isinstance(calib_val, str):
            calib = GripperCalib.from_file(path.parent / calib_val)
        elif isinstance(calib_val, dict):
            calib = GripperCalib(**calib_val)
        else:
            calib = None
        comp = data.get("compensation")
        quality_raw = dict(data.get("quality", {}))
        strict = bool(quality_raw.pop("strict", True))
        max_violations = int(quality_raw.pop("max_violations", 0))
        cfg = PipelineConfig(
            base_gripper=base_gripper,
            delta_c2g=delta,
            sync=SyncConfig(**data.get("sync", {})),
            quality=QualityThresholds(**quality_raw),
            strict_smoothness=strict,
            max_violations=max_violations,
            gripper_calib=calib,
            chain_file=data.get("chain_file"),
            mode=data.get("mode", "TcpAbsolute"),
            compensation=CompensationParams(**comp) if comp else None,
            ik=IkConfig(**data.get("ik", {})),
            seed_joints=data.get("seed_joints"),
            drift_align_tol_m=float(data.get("drift_align_tol_m", 0.01)),
            drift_closure_tol_m=float(data.get("drift_closure_tol_m", 0.02)),
            sim=bool(data.get("sim", False)),
            camera_name=data.get("camera_name", "wrist_cam"),
            digest=hashlib.sha256(raw).hexdigest(),
        )
    except TypeError as e:
        raise ConfigError(f"{path}: {e}") from e
    if cfg.mode not in ("TcpAbsolute", "TcpRelative", "Joint"):
        raise ConfigError(f"{path}: unknown mode {cfg.mode!r}")
    if cfg.mode == "Joint" and not cfg.chain_file:
        raise ConfigError(f"{path}: Joint mode requires chain_file")
    if cfg.chain_file is not None:
        chain_path = (path.parent / cfg.chain_file)
        if not chain_path.exists():
            raise ConfigError(f"chain file not found: {chain_path}")
        cfg.chain_file = str(chain_path)
    return cfg
