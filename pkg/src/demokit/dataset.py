"""Episode assembly, HDF5 serialization, validation, and reading.

On-disk layout per episode:

    episode_<idx>.hdf5
    |-- observations/
    |   |-- images/
    |   |   `-- <camera_name>        uint8 (T, H, W, 3) or string refs (T,)
    |   `-- qpos                     float64 (T, 7)
    |-- action                       float64, mirrors qpos
    |-- gripper_width                float64 (T, 1), mm, optional extension
    `-- attribute sim                bool

Joint-mode column layout (an extension; the reference layout above is the
7-column pose form [x, y, z, qx, qy, qz, qw]): the first dof columns are
joint angles in rad, followed by the gripper width in mm when available,
zero-padded on the right to at least 7 columns.

Files are written temp-then-rename with fixed, timestamp-free HDF5
settings so identical episodes produce byte-identical files.
"""

from __future__ import annotations

import os
import json
from dataclasses import dataclass, field
from pathlib import Path

import h5py
import numpy as np

from . import geometry
from .geometry import Pose
from .gripper import WidthSeries

DEFAULT_CAMERA_NAME = "wrist_cam"
MAX_FILES_PER_DIR = 50


class DatasetError(ValueError):
    pass


class SchemaError(DatasetError):
    pass


@dataclass
class Episode:
    qpos: np.ndarray                    # (T, C)
    action: np.ndarray                  # (T, C)
    images: np.ndarray | list[str]      # (T, H, W, 3) uint8 or T refs
    gripper_width: np.ndarray | None = None  # (T, 1) mm
    sim: bool = False
    camera_name: str = DEFAULT_CAMERA_NAME
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def length(self) -> int:
        return int(self.qpos.shape[0])


@dataclass
class EpisodeManifest:
    task: str
    episode_index: int
    source_paths: list[str] = field(default_factory=list)
    config_digest: str = ""

    def write(self, path) -> None:
        Path(path).write_text(
            json.dumps(
                {
                    "task": self.task,
                    "episode_index": self.episode_index,
                    "source_paths": self.source_paths,
                    "config_digest": self.config_digest,
                },
                indent=2,
            )
            + "\n"
        )


def poses_to_rows(poses) -> np.ndarray:
    return np.array([[*p.position, *p.quat] for p in poses], dtype=float)


def rows_to_poses(rows) -> list[Pose]:
    return [Pose(r[:3], r[3:7]) for r in np.asarray(rows, dtype=float)]


def assemble(
    synced,
    tcp: list[Pose],
    widths: WidthSeries | None,
    mode: str = "TcpAbsolute",
    joints: np.ndarray | None = None,
    sim: bool = False,
    camera_name: str = DEFAULT_CAMERA_NAME,
) -> Episode:
    """Build an Episode from index-aligned pipeline outputs.

    mode: TcpAbsolute | TcpRelative | Joint. In TcpRelative, qpos holds
    the absolute TCP rows and action holds per-step relative transforms
    (final row is a zero step). In Joint, qpos/action hold the joint-mode
    layout documented in the module docstring.
    """
    lengths = {"synced": len(synced), "tcp": len(tcp)}
    if widths is not None:
        lengths["widths"] = len(widths.widths)
    if joints is not None:
        lengths["joints"] = len(joints)
    if len(set(lengths.values())) != 1:
        raise DatasetError(f"length mismatch across inputs: {lengths}")
    t = len(tcp)
    if t < 1:
        raise DatasetError("empty episode")

    width_col = (
        np.asarray(widths.widths, dtype=float).reshape(t, 1) if widths else None
    )
    if mode == "TcpAbsolute":
        qpos = poses_to_rows(tcp)
        action = qpos.copy()
    elif mode == "TcpRelative":
        qpos = poses_to_rows(tcp)
        steps = geometry.relative_trajectory(tcp)
        action = np.array(
            [[*s.translation, *s.rotation] for s in steps]
            + [[0, 0, 0, 0, 0, 0, 1.0]],
            dtype=float,
        )
    elif mode == "Joint":
        if joints is None:
            raise DatasetError("Joint mode requires joint vectors")
        joints = np.asarray(joints, dtype=float)
        cols = [joints]
        if width_col is not None:
            cols.append(width_col)
        qpos = np.hstack(cols)
        if qpos.shape[1] < 7:
            qpos = np.hstack([qpos, np.zeros((t, 7 - qpos.shape[1]))])
        action = qpos.copy()
    else:
        raise DatasetError(f"unknown mode {mode!r}")

    return Episode(
        qpos=qpos,
        action=action,
        images=[f.camera.image_ref for f in synced],
        gripper_width=width_col,
        sim=sim,
        camera_name=camera_name,
    )


def write_episode(path, ep: Episode) -> None:
    """Serialize to HDF5, temp-then-rename, deterministic bytes."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with h5py.File(tmp, "w", libver=("v108", "v108")) as f:
            obs = f.create_group("observations")
            images = obs.create_group("images")
            if isinstance(ep.images, np.ndarray):
                images.create_dataset(
                    ep.camera_name,
                    data=np.ascontiguousarray(ep.images, dtype=np.uint8),
                    track_times=False,
                )
            else:
                images.create_dataset(
                    ep.camera_name,
                    data=np.array(ep.images, dtype=h5py.string_dtype()),
                    track_times=False,
                )
            obs.create_dataset(
                "qpos", data=np.asarray(ep.qpos, dtype=np.float64), track_times=False
            )
            f.create_dataset(
                "action", data=np.asarray(ep.action, dtype=np.float64), track_times=False
            )
            if ep.gripper_width is not None:
                f.create_dataset(
                    "gripper_width",
                    data=np.asarray(ep.gripper_width, dtype=np.float64).reshape(-1, 1),
                    track_times=False,
                )
            for name, data in sorted(ep.extras.items()):
                f.create_dataset(name, data=data, track_times=False)
            f.attrs["sim"] = bool(ep.sim)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


_KNOWN = {"observations/qpos", "action", "gripper_width"}


def read_episode(path) -> Episode:
    path = Path(path)
    with h5py.File(path, "r") as f:
        for required in ("observations", "observations/images", "observations/qpos", "action"):
            if required not in f:
                raise SchemaError(f"{path.name}: missing {required!r}")
        images_group = f["observations/images"]
        names = list(images_group.keys())
        if not names:
            raise SchemaError(f"{path.name}: no camera under observations/images")
        camera_name = names[0]
        raw = images_group[camera_name][()]
        if raw.dtype == np.uint8:
            images: np.ndarray | list[str] = raw
        else:
            images = [
                v.decode() if isinstance(v, bytes) else str(v) for v in raw
            ]
        if "sim" not in f.attrs:
            raise SchemaError(f"{path.name}: missing 'sim' attribute")
        extras = {}

        def collect(name, obj):
            if isinstance(obj, h5py.Dataset):
                if name not in _KNOWN and not name.startswith("observations/images"):
                    extras[name] = obj[()]

        f.visititems(collect)
        return Episode(
            qpos=f["observations/qpos"][()],
            action=f["action"][()],
            images=images,
            gripper_width=f["gripper_width"][()] if "gripper_width" in f else None,
            sim=bool(f.attrs["sim"]),
            camera_name=camera_name,
            extras=extras,
        )


def validate_episode(ep: Episode) -> list[str]:
    """Structural checks; returns a list of failure descriptions (empty
    means valid)."""
    failures: list[str] = []
    t = ep.length
    if t < 1:
        failures.append("empty episode (T < 1)")
    qpos = np.asarray(ep.qpos)
    if qpos.ndim != 2:
        failures.append(f"qpos must be 2-D, got shape {qpos.shape}")
        return failures
    if np.asarray(ep.action).shape != qpos.shape:
        failures.append(
            f"action shape {np.asarray(ep.action).shape} != qpos shape {qpos.shape}"
        )
    n_images = len(ep.images)
    if n_images != t:
        failures.append(f"images T={n_images} vs qpos T={t}: shape mismatch")
    if ep.gripper_width is not None and len(ep.gripper_width) != t:
        failures.append(
            f"gripper_width T={len(ep.gripper_width)} vs qpos T={t}: shape mismatch"
        )
    if qpos.shape[1] == 7:
        norms = np.linalg.norm(qpos[:, 3:7], axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > 1e-6)[0]
        for i in bad[:10]:
            failures.append(f"qpos row {i}: quaternion norm {norms[i]:.8f}")
        if len(bad) > 10:
            failures.append(f"... {len(bad) - 10} more quaternion norm failures")
    elif qpos.shape[1] < 7:
        failures.append(f"qpos has {qpos.shape[1]} columns, expected >= 7")
    if not isinstance(ep.sim, (bool, np.bool_)):
        failures.append("sim attribute missing or not boolean")
    return failures


def list_episode_files(directory) -> list[Path]:
    return sorted(Path(directory).glob("episode_*.hdf5"))


def next_episode_path(directory) -> Path:
    """Next episode filename, enforcing the per-directory file cap."""
    directory = Path(directory)
    existing = list_episode_files(directory)
    if len(existing) >= MAX_FILES_PER_DIR:
        raise DatasetError(
            f"{directory} already holds {MAX_FILES_PER_DIR} episode files"
        )
    used = {int(p.stem.split("_")[1]) for p in existing}
    idx = 0
    while idx in used:
        idx += 1
    return directory / f"episode_{idx}.hdf5"
