"""Multi-rate stream buffering, GCF sub-sampling, and nearest-pose pairing.

Log files are line-delimited, whitespace-separated. Pose log line:

    t x y z qx qy qz qw confidence

with confidence in {0, 1, 2, 3}. Camera log line:

    t frame_index image_ref [marker_id u v]...

with zero or more marker-detection triples after the image reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .geometry import Pose
from .gripper import MarkerDetection
from .quality import ConfidenceLevel


class StreamError(ValueError):
    """Malformed or out-of-order stream data."""


class ConfigurationError(ValueError):
    """Inconsistent synchronization configuration."""


@dataclass(frozen=True)
class PoseSample:
    pose: Pose
    confidence: ConfidenceLevel


@dataclass(frozen=True)
class CameraSample:
    frame_index: int
    image_ref: str
    detections: tuple[MarkerDetection, ...] = ()


@dataclass(frozen=True)
class StreamRecord:
    timestamp: float
    payload: PoseSample | CameraSample


@dataclass
class StreamBuffers:
    """Per-sensor append-only record buffers with monotonic timestamps."""

    streams: dict[str, list[StreamRecord]] = field(default_factory=dict)

    def ingest(self, stream_id: str, record: StreamRecord) -> None:
        buf = self.streams.setdefault(stream_id, [])
        if not math.isfinite(record.timestamp):
            raise StreamError(f"stream {stream_id!r}: non-finite timestamp")
        if buf and record.timestamp <= buf[-1].timestamp:
            raise StreamError(
                f"stream {stream_id!r}: timestamp {record.timestamp} not after "
                f"{buf[-1].timestamp}"
            )
        buf.append(record)

    def reset(self) -> None:
        for buf in self.streams.values():
            buf.clear()


@dataclass(frozen=True)
class SyncConfig:
    pose_rate_hz: int = 200
    camera_rate_hz: int = 60
    max_pair_offset_s: float | None = None

    @property
    def target_rate_hz(self) -> int:
        return greatest_common_frequency([self.pose_rate_hz, self.camera_rate_hz])

    @property
    def pair_offset_limit_s(self) -> float:
        # default: half the pose sampling interval
        if self.max_pair_offset_s is not None:
            return self.max_pair_offset_s
        return 0.5 / self.pose_rate_hz

    @property
    def decimation(self) -> int:
        k = self.camera_rate_hz / self.target_rate_hz
        if k != int(k):
            raise ConfigurationError(
                f"camera rate {self.camera_rate_hz} not an integer multiple of "
                f"target rate {self.target_rate_hz}"
            )
        return int(k)


@dataclass(frozen=True)
class SyncedFrame:
    tick_time: float
    camera: CameraSample
    pose: PoseSample
    pair_offset_s: float  # pose time - camera time


@dataclass
class SyncStats:
    emitted: int = 0
    dropped: int = 0
    max_abs_offset_s: float = 0.0
    mean_abs_offset_s: float = 0.0
    warnings: list[str] = field(default_factory=list)


def greatest_common_frequency(rates: Iterable[int]) -> int:
    rates = list(rates)
    if not rates:
        raise ConfigurationError("no sensor rates given")
    for r in rates:
        if int(r) != r or r < 1:
            raise ConfigurationError(f"invalid rate: {r}")
    return math.gcd(*(int(r) for r in rates))


def _nearest_pose_index(times: list[float], t: float, start: int) -> int:
    """Advance from `start` to the pose index nearest to t.

    Equidistant neighbors break toward the earlier pose.
    """
    i = start
    n = len(times)
    while i + 1 < n and abs(times[i + 1] - t) < abs(times[i] - t):
        i += 1
    return i


def subsample_and_pair(
    camera_buf: list[StreamRecord],
    pose_buf: list[StreamRecord],
    cfg: SyncConfig,
) -> tuple[list[SyncedFrame], SyncStats]:
    """Decimate camera frames to the target rate and pair each with the
    temporally nearest pose.

    Decimation keeps every k-th stored frame_index (k = camera/target rate).
    Frames whose best pose is further than the pair-offset limit are dropped
    and counted. Two-pointer merge over the sorted buffers; linear time.
    """
    stats = SyncStats()
    k = cfg.decimation
    limit = cfg.pair_offset_limit_s
    if not camera_buf or not pose_buf:
        stats.warnings.append("empty overlap window")
        return [], stats

    pose_times = [r.timestamp for r in pose_buf]
    first_index = camera_buf[0].payload.frame_index
    out: list[SyncedFrame] = []
    offsets: list[float] = []
    cursor = 0
    for rec in camera_buf:
        cam: CameraSample = rec.payload
        if (cam.frame_index - first_index) % k != 0:
            continue
        cursor = _nearest_pose_index(pose_times, rec.timestamp, cursor)
        offset = pose_times[cursor] - rec.timestamp
        if abs(offset) > limit:
            stats.dropped += 1
            continue
        out.append(
            SyncedFrame(
                tick_time=rec.timestamp,
                camera=cam,
                pose=pose_buf[cursor].payload,
                pair_offset_s=offset,
            )
        )
        offsets.append(abs(offset))
    stats.emitted = len(out)
    if offsets:
        stats.max_abs_offset_s = max(offsets)
        stats.mean_abs_offset_s = sum(offsets) / len(offsets)
    else:
        stats.warnings.append("no frames paired")
    return out, stats


# --- log file parsing / writing -------------------------------------------

def parse_pose_line(line: str, lineno: int) -> StreamRecord:
    parts = line.split()
    if len(parts) != 9:
        raise StreamError(f"pose log line {lineno}: expected 9 fields, got {len(parts)}")
    try:
        vals = [float(p) for p in parts[:8]]
        conf = ConfidenceLevel(int(parts[8]))
    except ValueError as e:
        raise StreamError(f"pose log line {lineno}: {e}") from e
    pose = Pose(vals[1:4], vals[4:8])
    return StreamRecord(vals[0], PoseSample(pose, conf))


def parse_camera_line(line: str, lineno: int) -> StreamRecord:
    parts = line.split()
    if len(parts) < 3 or (len(parts) - 3) % 3 != 0:
        raise StreamError(
            f"camera log line {lineno}: expected t, frame_index, image_ref and "
            f"detection triples, got {len(parts)} fields"
        )
    try:
        t = float(parts[0])
        frame_index = int(parts[1])
        dets = []
        for i in range(3, len(parts), 3):
            dets.append(
                MarkerDetection(
                    marker_id=int(parts[i]),
                    center_px=(float(parts[i + 1]), float(parts[i + 2])),
                )
            )
    except ValueError as e:
        raise StreamError(f"camera log line {lineno}: {e}") from e
    if frame_index < 0:
        raise StreamError(f"camera log line {lineno}: negative frame_index")
    return StreamRecord(t, CameraSample(frame_index, parts[2], tuple(dets)))


def load_pose_log(path) -> list[StreamRecord]:
    return _load(path, parse_pose_line)


def load_camera_log(path) -> list[StreamRecord]:
    records = _load(path, parse_camera_line)
    last = -1
    for i, rec in enumerate(records):
        if rec.payload.frame_index <= last:
            raise StreamError(
                f"camera log line {i + 1}: frame_index {rec.payload.frame_index} "
                f"not increasing"
            )
        last = rec.payload.frame_index
    return records


def _load(path, parse) -> list[StreamRecord]:
    records: list[StreamRecord] = []
    last_t = -math.inf
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rec = parse(line, lineno)
        if rec.timestamp <= last_t:
            raise StreamError(
                f"line {lineno}: timestamp {rec.timestamp} not after {last_t}"
            )
        last_t = rec.timestamp
        records.append(rec)
    return records


def format_pose_record(rec: StreamRecord) -> str:
    s: PoseSample = rec.payload
    p, q = s.pose.position, s.pose.quat
    fields = [rec.timestamp, *p, *q]
    return " ".join(f"{v:.15f}" for v in fields) + f" {int(s.confidence)}"


def format_camera_record(rec: StreamRecord) -> str:
    s: CameraSample = rec.payload
    out = [f"{rec.timestamp:.9f}", str(s.frame_index), s.image_ref]
    for d in s.detections:
        out += [str(d.marker_id), f"{d.center_px[0]:.6f}", f"{d.center_px[1]:.6f}"]
    return " ".join(out)
