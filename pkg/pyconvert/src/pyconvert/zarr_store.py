"""Minimal Zarr v2 directory store.

Writes uncompressed C-order chunks with the standard `.zgroup` / `.zarray` /
`.zattrs` JSON metadata, so the output is readable by any Zarr v2
implementation. Only the features this tool needs are supported: fixed-dtype
arrays (numeric and fixed-width bytes), no compressor, no filters.
"""

from __future__ import annotations

import itertools
import json
import math
from pathlib import Path

import numpy as np


class ZarrStoreError(ValueError):
    pass


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def init_group(path, attrs: dict | None = None) -> Path:
    """Create a group directory with its metadata files."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    _write_json(path / ".zgroup", {"zarr_format": 2})
    if attrs:
        _write_json(path / ".zattrs", attrs)
    return path


def write_array(path, data: np.ndarray, chunks: tuple[int, ...] | None = None) -> None:
    """Write one array as a chunked Zarr v2 dataset under `path`.

    Edge chunks are stored full-size and zero-padded, per the format. With
    chunks=None the whole array is a single chunk.
    """
    path = Path(path)
    data = np.ascontiguousarray(data)
    if data.ndim < 1:
        data = data.reshape(1)
    if data.dtype.hasobject:
        raise ZarrStoreError(f"{path.name}: object dtypes are not supported")
    shape = data.shape
    if chunks is None:
        chunks = shape
    chunks = tuple(min(max(int(c), 1), s if s else 1) for c, s in zip(chunks, shape))

    path.mkdir(parents=True, exist_ok=True)
    _write_json(
        path / ".zarray",
        {
            "zarr_format": 2,
            "shape": list(shape),
            "chunks": list(chunks),
            "dtype": data.dtype.str,
            "compressor": None,
            "filters": None,
            "fill_value": None,
            "order": "C",
            "dimension_separator": ".",
        },
    )
    grid = [math.ceil(s / c) for s, c in zip(shape, chunks)]
    for idx in itertools.product(*(range(g) for g in grid)):
        sel = tuple(
            slice(i * c, min((i + 1) * c, s)) for i, c, s in zip(idx, chunks, shape)
        )
        block = data[sel]
        if block.shape != chunks:  # zero-pad edge chunks to full size
            full = np.zeros(chunks, dtype=data.dtype)
            full[tuple(slice(0, n) for n in block.shape)] = block
            block = full
        (path / ".".join(str(i) for i in idx)).write_bytes(
            np.ascontiguousarray(block).tobytes()
        )


def read_array(path) -> np.ndarray:
    """Read back an array written by `write_array`."""
    path = Path(path)
    meta_path = path / ".zarray"
    if not meta_path.exists():
        raise ZarrStoreError(f"not an array: {path}")
    meta = json.loads(meta_path.read_text())
    shape = tuple(meta["shape"])
    chunks = tuple(meta["chunks"])
    dtype = np.dtype(meta["dtype"])
    if meta.get("compressor") is not None or meta.get("filters"):
        raise ZarrStoreError(f"{path}: compressed stores are not supported")
    out = np.zeros(shape, dtype=dtype)
    grid = [math.ceil(s / c) for s, c in zip(shape, chunks)]
    for idx in itertools.product(*(range(g) for g in grid)):
        name = ".".join(str(i) for i in idx)
        raw = (path / name).read_bytes()
        block = np.frombuffer(raw, dtype=dtype).reshape(chunks)
        sel = tuple(
            slice(i * c, min((i + 1) * c, s)) for i, c, s in zip(idx, chunks, shape)
        )
        out[sel] = block[tuple(slice(0, sl.stop - sl.start) for sl in sel)]
    return out


def read_attrs(path) -> dict:
    attrs_path = Path(path) / ".zattrs"
    return json.loads(attrs_path.read_text()) if attrs_path.exists() else {}


def list_arrays(root) -> list[str]:
    """Relative paths of every array under a group, sorted."""
    root = Path(root)
    return sorted(
        str(p.parent.relative_to(root)) for p in root.rglob(".zarray")
    )
