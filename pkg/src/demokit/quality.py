"""Confidence gating, low-confidence repair, smoothness checks, drift
verdicts, and trajectory-error metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

import numpy as np

from .geometry import Pose, quat_angle, quat_conj, quat_mul, slerp


class QualityError(ValueError):
    pass


class ConfidenceLevel(IntEnum):
    FAILED = 0
    LOW = 1
    MEDIUM = 2
    HIGH = 3


@dataclass(frozen=True)
class QualityThresholds:
    v_max: float = 1.5        # m/s
    a_max: float = 20.0       # m/s^2
    dtheta_max: float = 0.3   # rad per step
    high_conf_fraction: float = 0.95


@dataclass(frozen=True)
class Violation:
    index: int
    kind: str  # velocity | acceleration | orientation
    value: float
    threshold: float


@dataclass
class QualityReport:
    high_fraction: float = 0.0
    repaired_indices: list[int] = field(default_factory=list)
    violations: list[Violation] = field(default_factory=list)
    verdict: str = "Pass"

    def to_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}",
            f"high_fraction: {self.high_fraction:.4f}",
            f"repaired: {len(self.repaired_indices)}",
            f"violations: {len(self.violations)}",
        ]
        for v in self.violations:
            lines.append(
                f"  [{v.index}] {v.kind}: {v.value:.6g} > {v.threshold:.6g}"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "high_fraction": self.high_fraction,
            "repaired_indices": list(self.repaired_indices),
            "violations": [
                {
                    "index": v.index,
                    "kind": v.kind,
                    "value": v.value,
                    "threshold": v.threshold,
                }
                for v in self.violations
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class DriftVerdict:
    endpoint_residual_m: float
    status: str  # Aligned | LoopClosed | Reinitialize


def validate_environment(samples, thr: QualityThresholds) -> QualityReport:
    """Gate on the fraction of High-confidence poses."""
    samples = list(samples)
    if not samples:
        raise QualityError("empty pose sample list")
    high = sum(1 for s in samples if s.confidence == ConfidenceLevel.HIGH)
    frac = high / len(samples)
    verdict = "Pass" if frac >= thr.high_conf_fraction else "Fail"
    return QualityReport(high_fraction=frac, verdict=verdict)


def repair_low_confidence(timestamps: Sequence[float], samples):
    """Replace every sample below High confidence by interpolation between
    the nearest flanking High samples (linear position, slerp orientation,
    parameterized by timestamp).

    Runs of low confidence touching either end are unrepairable.
    Returns (repaired samples, repaired indices).
    """
    from .sync import PoseSample  # local import to avoid a cycle

    samples = list(samples)
    if len(samples) != len(timestamps):
        raise QualityError("timestamps and samples length mismatch")
    if not samples:
        raise QualityError("empty pose sample list")
    for end in (0, -1):
        if samples[end].confidence < ConfidenceLevel.MEDIUM:
            raise QualityError("trajectory endpoint has confidence below Medium")
    high = [i for i, s in enumerate(samples) if s.confidence == ConfidenceLevel.HIGH]
    if not high or high[0] != 0 or high[-1] != len(samples) - 1:
        lo = 0 if (not high or high[0] != 0) else high[-1] + 1
        hi = (high[0] - 1) if (high and high[0] != 0) else len(samples) - 1
        raise QualityError(
            f"unrepairable low-confidence span touching trajectory end "
            f"(indices {lo}..{hi})"
        )
    out = list(samples)
    repaired: list[int] = []
    for a, b in zip(high, high[1:]):
        if b == a + 1:
            continue
        pa, pb = samples[a].pose, samples[b].pose
        ta, tb = timestamps[a], timestamps[b]
        for i in range(a + 1, b):
            u = (timestamps[i] - ta) / (tb - ta)
            pose = Pose(
                (1.0 - u) * pa.position + u * pb.position,
                slerp(pa.quat, pb.quat, u),
            )
            out[i] = PoseSample(pose, ConfidenceLevel.HIGH)
            repaired.append(i)
    return out, repaired


def smoothness_check(
    timestamps: Sequence[float], samples, thr: QualityThresholds
) -> list[Violation]:
    """Finite-difference velocity / acceleration / per-step rotation angle
    against thresholds. Violations carry the index of the later sample of
    the offending step (or the center sample for acceleration)."""
    samples = list(samples)
    n = len(samples)
    if n < 3:
        raise QualityError("need at least 3 samples for smoothness checks")
    t = np.asarray(timestamps, dtype=float)
    if t.shape != (n,) or np.any(np.diff(t) <= 0):
        raise QualityError("timestamps must be strictly increasing")
    pos = np.stack([s.pose.position for s in samples])
    dt = np.diff(t)
    vel = np.linalg.norm(np.diff(pos, axis=0), axis=1) / dt

    violations: list[Violation] = []
    for i, v in enumerate(vel):
        if v > thr.v_max:
            violations.append(Violation(i + 1, "velocity", float(v), thr.v_max))
    # second difference on the velocity vectors, evaluated at interior samples
    vvec = np.diff(pos, axis=0) / dt[:, None]
    dt_mid = 0.5 * (dt[:-1] + dt[1:])
    acc = np.linalg.norm(np.diff(vvec, axis=0), axis=1) / dt_mid
    for i, a in enumerate(acc):
        if a > thr.a_max:
            violations.append(Violation(i + 1, "acceleration", float(a), thr.a_max))
    for i in range(n - 1):
        dq = quat_mul(quat_conj(samples[i].pose.quat), samples[i + 1].pose.quat)
        ang = quat_angle(dq)
        if ang > thr.dtheta_max:
            violations.append(Violation(i + 1, "orientation", float(ang), thr.dtheta_max))
    violations.sort(key=lambda v: (v.index, v.kind))
    return violations


def drift_check(
    traj: Sequence[Pose],
    reference: Pose,
    align_tol_m: float = 0.01,
    closure_tol_m: float = 0.02,
) -> DriftVerdict:
    """Classify endpoint drift against a reference pose.

    Aligned: endpoint within align_tol of the reference. LoopClosed: the
    trajectory re-enters the reference neighborhood before the end and the
    endpoint residual is below closure_tol. Otherwise Reinitialize.
    """
    traj = list(traj)
    if not traj:
        raise QualityError("empty trajectory")
    residual = float(np.linalg.norm(traj[-1].position - reference.position))
    if residual <= align_tol_m:
        return DriftVerdict(residual, "Aligned")
    revisited = any(
        np.linalg.norm(p.position - reference.position) <= closure_tol_m
        for p in traj[:-1]
    )
    if revisited and residual <= closure_tol_m:
        return DriftVerdict(residual, "LoopClosed")
    return DriftVerdict(residual, "Reinitialize")


def translation_error(estimate: Sequence[Pose], truth: Sequence[Pose]) -> dict:
    """Per-index Euclidean position error stats in millimeters."""
    estimate = list(estimate)
    truth = list(truth)
    if len(estimate) != len(truth):
        raise QualityError(
            f"trajectory length mismatch: {len(estimate)} vs {len(truth)}"
        )
    if not estimate:
        raise QualityError("empty trajectories")
    err = np.array(
        [np.linalg.norm(e.position - t.position) for e, t in zip(estimate, truth)]
    )
    err_mm = err * 1000.0
    return {
        "mean": float(np.mean(err_mm)),
        "max": float(np.max(err_mm)),
        "rmse": float(np.sqrt(np.mean(err_mm**2))),
    }
