"""HDF5 episode files to a mirrored Zarr v2 store, with verification.

Every copied array is checked back against the source by a SHA-256 digest of
its raw C-order bytes; an episode only counts as converted when every digest
matches. Files that fail schema checks or verification are skipped (their
partial output removed) and named in the report.
"""

from __future__ import annotations

import hashlib
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import h5py
import numpy as np

from . import zarr_store

REQUIRED_PATHS = ("observations/images", "observations/qpos", "action")


class ConversionError(ValueError):
    pass


@dataclass
class ConversionReport:
    episodes_converted: int = 0
    arrays_checked: int = 0
    checksum_matches: list[bool] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checksum_matches) and not self.skipped

    def to_text(self) -> str:
        lines = [
            f"episodes converted: {self.episodes_converted}",
            f"arrays checked:     {self.arrays_checked}",
            f"checksums matched:  {sum(self.checksum_matches)}/{len(self.checksum_matches)}",
        ]
        for name, reason in self.skipped:
            lines.append(f"skipped {name}: {reason}")
        return "\n".join(lines)


def _canonical(data: np.ndarray) -> np.ndarray:
    """Array as stored: contiguous, with variable-length strings widened to
    fixed-width bytes (the store has no object dtype)."""
    data = np.asarray(data)
    if data.dtype.hasobject or data.dtype.kind == "U":
        data = np.array(
            [v if isinstance(v, bytes) else str(v).encode() for v in data.ravel()],
            dtype=np.bytes_,
        ).reshape(data.shape)
    return np.ascontiguousarray(data)


def _digest(data: np.ndarray) -> str:
    return hashlib.sha256(data.tobytes()).hexdigest()


def _json_value(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, bytes):
        return v.decode()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def _check_schema(f: h5py.File, name: str) -> None:
    for required in REQUIRED_PATHS:
        if required not in f:
            raise ConversionError(f"missing {required!r}")
    if not list(f["observations/images"].keys()):
        raise ConversionError("no camera under observations/images")
    if "sim" not in f.attrs:
        raise ConversionError("missing 'sim' attribute")
    qpos = f["observations/qpos"]
    if qpos.ndim != 2:
        raise ConversionError(f"qpos must be 2-D, got shape {qpos.shape}")


def _convert_one(
    src: Path, group: Path, chunk_rows: int | None, report: ConversionReport
) -> None:
    with h5py.File(src, "r") as f:
        _check_schema(f, src.name)
        attrs = {k: _json_value(v) for k, v in f.attrs.items()}
        zarr_store.init_group(group, attrs)

        datasets: list[tuple[str, np.ndarray]] = []

        def collect(name, obj):
            if isinstance(obj, h5py.Dataset):
                datasets.append((name, _canonical(obj[()])))

        f.visititems(collect)

    for name, data in datasets:
        chunks = None
        if chunk_rows is not None and data.ndim >= 1 and data.shape[0] > chunk_rows:
            chunks = (chunk_rows,) + data.shape[1:]
        zarr_store.write_array(group / name, data, chunks)

    for name, data in datasets:
        back = zarr_store.read_array(group / name)
        report.arrays_checked += 1
        report.checksum_matches.append(_digest(data) == _digest(back))
    n = len(datasets)
    if not all(report.checksum_matches[-n:]):
        raise ConversionError("checksum mismatch after write")


def convert(src, out_path, chunk_rows: int | None = None) -> ConversionReport:
    """Convert one episode file or a directory of them into a Zarr store.

    The store root is a group holding one group per episode, named after
    the source file stem; the in-file hierarchy is mirrored below it.
    """
    src = Path(src)
    if src.is_dir():
        files = sorted(src.glob("episode_*.hdf5"))
    elif src.exists():
        files = [src]
    else:
        raise ConversionError(f"input not found: {src}")

    out = Path(out_path)
    zarr_store.init_group(out)
    report = ConversionReport()
    for f in files:
        group = out / f.stem
        try:
            _convert_one(f, group, chunk_rows, report)
            report.episodes_converted += 1
        except (ConversionError, OSError) as e:
            if group.exists():
                shutil.rmtree(group)
            report.skipped.append((f.name, str(e)))
    return report
