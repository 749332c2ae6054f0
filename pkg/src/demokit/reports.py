"""Report rendering: delimited summaries plus matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def write_trajectory_csv(path, tick_times, tcp, widths=None) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        header = ["t", "x", "y", "z", "qx", "qy", "qz", "qw"]
        if widths is not None:
            header.append("width_mm")
        w.writerow(header)
        for i, (t, pose) in enumerate(zip(tick_times, tcp)):
            row = [f"{t:.6f}"] + [f"{v:.9f}" for v in (*pose.position, *pose.quat)]
            if widths is not None:
                row.append(f"{widths[i]:.4f}")
            w.writerow(row)


def write_sync_stats_csv(path, stats) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["emitted", "dropped", "max_abs_offset_s", "mean_abs_offset_s"])
        w.writerow(
            [stats.emitted, stats.dropped, f"{stats.max_abs_offset_s:.9f}",
             f"{stats.mean_abs_offset_s:.9f}"]
        )


def write_error_csv(path, stats_mm: dict) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["mean_mm", "max_mm", "rmse_mm"])
        w.writerow([f"{stats_mm['mean']:.6f}", f"{stats_mm['max']:.6f}",
                    f"{stats_mm['rmse']:.6f}"])


def trajectory_figure(path, tick_times, tcp, widths=None, title="TCP trajectory") -> None:
    pos = np.stack([p.position for p in tcp])
    n_rows = 3 if widths is not None else 2
    fig, axes = plt.subplots(n_rows, 1, figsize=(7, 2.6 * n_rows))
    axes[0].plot(pos[:, 0], pos[:, 1], lw=1.0)
    axes[0].set_xlabel("x [m]")
    axes[0].set_ylabel("y [m]")
    axes[0].set_title(title)
    axes[0].axis("equal")
    for k, label in ((0, "x"), (1, "y"), (2, "z")):
        axes[1].plot(tick_times, pos[:, k], lw=1.0, label=label)
    axes[1].set_xlabel("t [s]")
    axes[1].set_ylabel("position [m]")
    axes[1].legend(loc="best", fontsize=8)
    if widths is not None:
        axes[2].plot(tick_times, widths, lw=1.0, color="tab:green")
        axes[2].set_xlabel("t [s]")
        axes[2].set_ylabel("width [mm]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def pair_offset_figure(path, synced) -> None:
    offsets_ms = [f.pair_offset_s * 1e3 for f in synced]
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.hist(offsets_ms, bins=40, color="tab:blue")
    ax.set_xlabel("pose-camera pairing offset [ms]")
    ax.set_ylabel("frames")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def error_figure(path, errors_mm, title="Per-frame translation error") -> None:
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(errors_mm, lw=1.0, color="tab:red")
    ax.set_xlabel("frame")
    ax.set_ylabel("error [mm]")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def sweep_figure(path, widths_m, distances_m) -> None:
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(np.asarray(widths_m) * 1e3, np.asarray(distances_m) * 1e3, lw=1.2)
    ax.set_xlabel("gripper width [mm]")
    ax.set_ylabel("compensation distance [mm]")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
