"""End-to-end batch processing: quality gates, synchronization, trajectory
transforms, width extraction, optional IK, episode assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dataset, geometry, gripper, kinematics, quality, sync
from .config import PipelineConfig
from .quality import DriftVerdict, QualityReport


class GateFailure(RuntimeError):
    """A quality gate rejected the input; carries the stage name."""

    def __init__(self, stage: str, message: str, report: QualityReport | None = None):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.report = report


@dataclass
class PipelineResult:
    episode: dataset.Episode
    report: QualityReport
    stats: sync.SyncStats
    drift: DriftVerdict
    synced: list[sync.SyncedFrame]
    tcp: list[geometry.Pose]
    tick_times: list[float]
    joints: np.ndarray | None = None


def process_logs(
    cfg: PipelineConfig,
    pose_records: list[sync.StreamRecord],
    camera_records: list[sync.StreamRecord],
) -> PipelineResult:
    if not pose_records:
        raise GateFailure("input", "empty pose log")
    if not camera_records:
        raise GateFailure("input", "empty camera log")

    # 1. environment gate on raw confidence levels
    samples = [r.payload for r in pose_records]
    report = quality.validate_environment(samples, cfg.quality)
    if report.verdict == "Fail":
        raise GateFailure(
            "environment",
            f"only {report.high_fraction:.1%} of poses at High confidence "
            f"(threshold {cfg.quality.high_conf_fraction:.0%})",
            report,
        )

    # 2. repair sub-High samples
    times = [r.timestamp for r in pose_records]
    try:
        repaired, repaired_idx = quality.repair_low_confidence(times, samples)
    except quality.QualityError as e:
        raise GateFailure("repair", str(e), report) from e
    report.repaired_indices = repaired_idx
    pose_records = [
        sync.StreamRecord(t, s) for t, s in zip(times, repaired)
    ]

    # 3. smoothness gate
    violations = quality.smoothness_check(times, repaired, cfg.quality)
    report.violations = violations
    limit = 0 if cfg.strict_smoothness else cfg.max_violations
    if len(violations) > limit:
        report.verdict = "Fail"
        raise GateFailure(
            "smoothness", f"{len(violations)} threshold violations", report
        )

    # 4. drift verdict (advisory)
    tracker_traj = [s.pose for s in repaired]
    drift = quality.drift_check(
        tracker_traj,
        geometry.Pose.identity(),
        cfg.drift_align_tol_m,
        cfg.drift_closure_tol_m,
    )

    # 5. synchronize
    synced, stats = sync.subsample_and_pair(camera_records, pose_records, cfg.sync)
    if not synced:
        raise GateFailure("sync", "no synchronized frames produced")
    tick_times = [f.tick_time for f in synced]

    # 6. trajectory transforms
    tcp = geometry.tcp_trajectory(
        cfg.base_gripper, cfg.delta_c2g, [f.pose.pose for f in synced]
    )

    # 7. gripper widths
    widths = None
    if cfg.gripper_calib is not None:
        try:
            widths = gripper.widths_from_frames(
                [f.camera.detections for f in synced], cfg.gripper_calib
            )
        except gripper.GripperError as e:
            raise GateFailure("gripper", str(e), report) from e

    # 8. optional IK
    joints = None
    if cfg.mode == "Joint":
        chain = kinematics.load_chain(cfg.chain_file)
        seed0 = (
            np.asarray(cfg.seed_joints, dtype=float)
            if cfg.seed_joints is not None
            else np.zeros(chain.dof)
        )
        joints, _ = kinematics.joint_trajectory(chain, tcp, seed0, cfg.ik)

    episode = dataset.assemble(
        synced,
        tcp,
        widths,
        mode=cfg.mode,
        joints=joints,
        sim=cfg.sim,
        camera_name=cfg.camera_name,
    )
    return PipelineResult(
        episode=episode,
        report=report,
        stats=stats,
        drift=drift,
        synced=synced,
        tcp=tcp,
        tick_times=tick_times,
        joints=joints,
    )
