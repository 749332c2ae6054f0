"""Plain-text dataset summaries over a directory of episode files."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from statistics import median

import h5py
import numpy as np


@dataclass
class EpisodeFacts:
    name: str
    length: int
    layout: str                 # "Pose" (7-col, unit quats) or "Joint"
    width_mean_mm: float | None
    quat_norm_dev: float | None  # max |norm - 1| over pose rows


def _inspect(path: Path) -> EpisodeFacts:
    with h5py.File(path, "r") as f:
        qpos = f["observations/qpos"][()]
        widths = f["gripper_width"][()] if "gripper_width" in f else None
    dev = None
    layout = "Joint"
    if qpos.ndim == 2 and qpos.shape[1] == 7:
        norms = np.linalg.norm(qpos[:, 3:7], axis=1)
        dev = float(np.abs(norms - 1.0).max())
        if dev <= 1e-6:
            layout = "Pose"
    return EpisodeFacts(
        name=path.name,
        length=int(qpos.shape[0]),
        layout=layout,
        width_mean_mm=float(np.mean(widths)) if widths is not None else None,
        quat_norm_dev=dev,
    )


def summarize(path) -> str:
    """One table row per qpos layout found under `path` (file or
    directory): episode count, length distribution, width statistics, and
    the worst quaternion-norm deviation."""
    path = Path(path)
    files = sorted(path.glob("episode_*.hdf5")) if path.is_dir() else [path]
    facts: list[EpisodeFacts] = []
    errors: list[str] = []
    for f in files:
        try:
            facts.append(_inspect(f))
        except (OSError, KeyError) as e:
            errors.append(f"unreadable {f.name}: {e}")

    header = f"{'layout':<8} {'episodes':>8} {'T min':>6} {'T med':>6} {'T max':>6} {'width mm':>9} {'|q|-1 max':>10}"
    lines = [header, "-" * len(header)]
    for layout in sorted({x.layout for x in facts}):
        group = [x for x in facts if x.layout == layout]
        lengths = [x.length for x in group]
        widths = [x.width_mean_mm for x in group if x.width_mean_mm is not None]
        devs = [x.quat_norm_dev for x in group if x.quat_norm_dev is not None]
        lines.append(
            f"{layout:<8} {len(group):>8} {min(lengths):>6} "
            f"{int(median(lengths)):>6} {max(lengths):>6} "
            f"{(f'{sum(widths) / len(widths):.2f}' if widths else '-'):>9} "
            f"{(f'{max(devs):.2e}' if devs else '-'):>10}"
        )
    lines.append(f"total: {len(facts)} episodes")
    lines.extend(errors)
    return "\n".join(lines)
