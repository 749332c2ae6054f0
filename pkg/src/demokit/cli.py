"""Command-line pipeline driver.

Exit codes: 0 success, 1 validation/quality failure, 2 usage or
configuration error, 3 processing error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import compensation as comp
from . import dataset, geometry, kinematics, quality, reports, simgen, sync
from .config import ConfigError, load_pipeline_config
from .gripper import GripperError
from .kinematics import ChainParseError, KinematicsError
from .pipeline import GateFailure, process_logs
from .simgen import SimSpecError
from .sync import StreamError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_PROCESSING = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Trajectory-processing toolkit: raw handheld sensor logs to
    training-ready demonstration episodes."""


@main.command()
@click.argument("spec_path", type=click.Path())
@click.argument("out_dir", type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
def generate(spec_path, out_dir, seed):
    """Generate synthetic pose/camera logs and a ground-truth file."""
    spec_path = Path(spec_path)
    if not spec_path.exists():
        _fail(EXIT_USAGE, f"spec file not found: {spec_path}")
    try:
        loaded = simgen.load_spec_file(spec_path)
    except SimSpecError as e:
        _fail(EXIT_USAGE, str(e))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pose_rate = loaded["pose_rate_hz"]
    cam_rate = loaded["cam_rate_hz"]
    truth_rate = np.lcm(pose_rate, cam_rate)
    truth = simgen.generate_truth(loaded["spec"], int(truth_rate))
    pose_records, camera_records = simgen.sample_streams(
        truth,
        pose_rate_hz=pose_rate,
        cam_rate_hz=cam_rate,
        noise=loaded["noise"],
        calib=loaded["calib"],
        width=loaded["width"],
        seed=seed,
        delta_c2g=loaded["delta_c2g"],
    )
    simgen.write_logs(
        pose_records, camera_records, out / "pose_log.txt", out / "camera_log.txt"
    )
    tick_rate = sync.greatest_common_frequency([pose_rate, cam_rate])
    ticks = simgen.generate_truth(loaded["spec"], tick_rate)
    simgen.write_truth(ticks, out / "truth.txt")
    click.echo(f"wrote pose_log.txt, camera_log.txt, truth.txt to {out}")


@main.command()
@click.argument("config_path", type=click.Path())
@click.argument("pose_log", type=click.Path(exists=True))
@click.argument("camera_log", type=click.Path(exists=True))
@click.argument("out_dir", type=click.Path())
@click.option("--task", default="demo", show_default=True, help="Task name for the manifest.")
@click.option("--plots/--no-plots", default=True, show_default=True)
def process(config_path, pose_log, camera_log, out_dir, task, plots):
    """Run the full pipeline: gates, sync, transforms, widths, optional IK,
    and episode serialization."""
    try:
        cfg = load_pipeline_config(config_path)
    except ConfigError as e:
        _fail(EXIT_USAGE, str(e))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        pose_records = sync.load_pose_log(pose_log)
        camera_records = sync.load_camera_log(camera_log)
    except StreamError as e:
        _fail(EXIT_PROCESSING, str(e))

    try:
        result = process_logs(cfg, pose_records, camera_records)
    except GateFailure as e:
        if e.report is not None:
            (out / "quality_report.txt").write_text(e.report.to_text() + "\n")
            (out / "quality_report.json").write_text(e.report.to_json() + "\n")
        _fail(EXIT_VALIDATION, str(e))
    except (KinematicsError, ChainParseError, GripperError, sync.ConfigurationError) as e:
        _fail(EXIT_PROCESSING, str(e))

    episode_path = dataset.next_episode_path(out)
    dataset.write_episode(episode_path, result.episode)
    idx = int(episode_path.stem.split("_")[1])
    dataset.EpisodeManifest(
        task=task,
        episode_index=idx,
        source_paths=[str(pose_log), str(camera_log)],
        config_digest=cfg.digest,
    ).write(out / f"episode_{idx}.manifest.json")

    (out / "quality_report.txt").write_text(result.report.to_text() + "\n")
    (out / "quality_report.json").write_text(result.report.to_json() + "\n")
    reports.write_sync_stats_csv(out / "sync_stats.csv", result.stats)
    widths = (
        result.episode.gripper_width.ravel().tolist()
        if result.episode.gripper_width is not None
        else None
    )
    reports.write_trajectory_csv(
        out / "tcp_trajectory.csv", result.tick_times, result.tcp, widths
    )
    if plots:
        reports.trajectory_figure(
            out / "trajectory.png", result.tick_times, result.tcp, widths
        )
        reports.pair_offset_figure(out / "pair_offsets.png", result.synced)
    click.echo(
        f"wrote {episode_path.name}: {result.episode.length} frames, "
        f"drift={result.drift.status}, "
        f"max pair offset {result.stats.max_abs_offset_s * 1e3:.3f} ms"
    )


@main.command()
@click.argument("config_path", type=click.Path())
@click.argument("episode_path", type=click.Path(exists=True))
@click.argument("out_dir", type=click.Path())
def compensate(config_path, episode_path, out_dir):
    """Precompute width-compensated joint commands for an episode with TCP
    qpos and gripper widths."""
    try:
        cfg = load_pipeline_config(config_path)
    except ConfigError as e:
        _fail(EXIT_USAGE, str(e))
    if cfg.compensation is None or cfg.chain_file is None:
        _fail(EXIT_USAGE, "config must provide compensation params and chain_file")
    try:
        ep = dataset.read_episode(episode_path)
    except dataset.SchemaError as e:
        _fail(EXIT_VALIDATION, str(e))
    if ep.gripper_width is None:
        _fail(EXIT_VALIDATION, f"{episode_path}: missing gripper_width dataset")
    if ep.qpos.shape[1] != 7:
        _fail(EXIT_VALIDATION, f"{episode_path}: qpos is not 7-column TCP data")

    chain = kinematics.load_chain(cfg.chain_file)
    seed = (
        np.asarray(cfg.seed_joints, dtype=float)
        if cfg.seed_joints is not None
        else np.zeros(chain.dof)
    )
    tcp = dataset.rows_to_poses(ep.qpos)
    widths_m = ep.gripper_width.ravel() / 1000.0
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    thetas = np.zeros((len(tcp), chain.dof))
    displacements = []
    failures = []
    for i, (pose, w) in enumerate(zip(tcp, widths_m)):
        d = comp.compensation_distance(float(w), cfg.compensation)
        displacements.append(d)
        try:
            thetas[i] = comp.compensated_joint_command(
                chain, pose, float(w), cfg.compensation, seed, cfg.ik
            )
            seed = thetas[i]
        except KinematicsError as e:
            failures.append((i, str(e)))
    np.savetxt(
        out / "compensated_joints.csv",
        thetas,
        delimiter=",",
        header=",".join(j.name for j in chain.joints),
        comments="",
    )
    d = np.asarray(displacements)
    click.echo(
        f"compensated {len(tcp)} frames; displacement mean {d.mean() * 1e3:.3f} mm, "
        f"min {d.min() * 1e3:.3f} mm, max {d.max() * 1e3:.3f} mm"
    )
    for i, msg in failures:
        click.echo(f"frame {i}: IK failure: {msg}", err=True)
    if failures:
        sys.exit(EXIT_PROCESSING)


@main.command()
@click.argument("config_path", type=click.Path())
@click.argument("out_dir", type=click.Path())
@click.option("--steps", type=int, default=50, show_default=True)
def sweep(config_path, out_dir, steps):
    """Report the compensation distance and shifted pose over a width grid."""
    try:
        cfg = load_pipeline_config(config_path)
    except ConfigError as e:
        _fail(EXIT_USAGE, str(e))
    if cfg.compensation is None:
        _fail(EXIT_USAGE, "config must provide compensation params")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pose = geometry.Pose.identity()
    widths = np.linspace(0.0, cfg.compensation.w_max_m, steps)
    dists = [comp.compensation_distance(float(w), cfg.compensation) for w in widths]
    with open(out / "compensation_sweep.csv", "w") as f:
        f.write("width_m,distance_m,shift_x,shift_y,shift_z\n")
        for w, d in zip(widths, dists):
            shifted = comp.corrected_tcp(pose, d)
            dx, dy, dz = shifted.position - pose.position
            f.write(f"{w:.6f},{d:.6f},{dx:.6f},{dy:.6f},{dz:.6f}\n")
    reports.sweep_figure(out / "compensation_sweep.png", widths, dists)
    click.echo(f"wrote compensation_sweep.csv and .png to {out}")


@main.command()
@click.argument("path", type=click.Path(exists=True))
def validate(path):
    """Validate one episode file or every episode in a directory."""
    path = Path(path)
    files = dataset.list_episode_files(path) if path.is_dir() else [path]
    if not files:
        _fail(EXIT_VALIDATION, f"no episode files under {path}")
    if len(files) > dataset.MAX_FILES_PER_DIR:
        click.echo(
            f"warning: {len(files)} files exceeds the per-directory cap of "
            f"{dataset.MAX_FILES_PER_DIR}",
            err=True,
        )
    bad = 0
    for f in files:
        try:
            ep = dataset.read_episode(f)
            failures = dataset.validate_episode(ep)
        except (dataset.SchemaError, OSError) as e:
            failures = [str(e)]
        if failures:
            bad += 1
            click.echo(f"{f.name}: INVALID")
            for msg in failures:
                click.echo(f"  - {msg}")
        else:
            click.echo(f"{f.name}: ok ({dataset.read_episode(f).length} frames)")
    click.echo(f"{len(files) - bad}/{len(files)} episodes valid")
    sys.exit(EXIT_OK if bad == 0 else EXIT_VALIDATION)


@main.command(name="eval")
@click.argument("episode_path", type=click.Path(exists=True))
@click.argument("truth_path", type=click.Path(exists=True))
@click.option("--out-dir", type=click.Path(), default=None)
def eval_cmd(episode_path, truth_path, out_dir):
    """Translation-error statistics (mm) of an episode against a truth
    trajectory file."""
    try:
        ep = dataset.read_episode(episode_path)
    except dataset.SchemaError as e:
        _fail(EXIT_VALIDATION, str(e))
    if ep.qpos.shape[1] != 7:
        _fail(EXIT_VALIDATION, "episode qpos is not 7-column TCP data")
    truth = simgen.load_truth(truth_path)
    estimate = dataset.rows_to_poses(ep.qpos)
    truth_poses = [p for _, p in truth[: len(estimate)]]
    try:
        stats = quality.translation_error(estimate, truth_poses)
    except quality.QualityError as e:
        _fail(EXIT_VALIDATION, str(e))
    click.echo(
        f"mean {stats['mean']:.6f} mm  max {stats['max']:.6f} mm  "
        f"rmse {stats['rmse']:.6f} mm"
    )
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        reports.write_error_csv(out / "translation_error.csv", stats)
        errors_mm = [
            float(np.linalg.norm(e.position - t.position)) * 1e3
            for e, t in zip(estimate, truth_poses)
        ]
        reports.error_figure(out / "translation_error.png", errors_mm)


if __name__ == "__main__":
    main()
