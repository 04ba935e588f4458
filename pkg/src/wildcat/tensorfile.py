"""Binary tensor container and the compressed-cache file layout.

A record is::

    b"WCT1" | dtype u8 (0 = f32, 1 = f64) | ndim u8 | ndim x u64 LE | payload

with a little-endian row-major payload. A cache file is a fixed sequence of
records (see ``CACHE_FIELDS``) next to a ``<path>.manifest`` text file of
``key=value`` lines.
"""

from __future__ import annotations

import io
import os
import struct

import numpy as np

from .compress import CompressedCache

MAGIC = b"WCT1"
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODES = {np.dtype("float32"): 0, np.dtype("float64"): 1}

CACHE_FIELDS = ("coreset_keys", "compressed_values", "norm_weights",
                "value_min", "value_max", "coreset_indices")


class TensorFileError(OSError):
    pass


def encode_tensor(arr) -> bytes:
    arr = np.asarray(arr)
    if arr.dtype not in _CODES:
        arr = arr.astype(np.float64)
    if arr.ndim > 255:
        raise TensorFileError("too many dimensions")
    code = _CODES[arr.dtype]
    head = MAGIC + struct.pack("<BB", code, arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return head + np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes()


def _read_exact(fh, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise TensorFileError(f"truncated tensor file while reading {what}")
    return data


def decode_tensor(fh) -> np.ndarray | None:
    """Read one record from a binary stream; ``None`` at a clean EOF."""
    magic = fh.read(4)
    if not magic:
        return None
    if magic != MAGIC:
        raise TensorFileError(f"bad magic {magic!r}")
    code, ndim = struct.unpack("<BB", _read_exact(fh, 2, "header"))
    if code not in _DTYPES:
        raise TensorFileError(f"unknown dtype code {code}")
    dims = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim, "dims"))
    dtype = _DTYPES[code]
    count = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    payload = _read_exact(fh, count * dtype.itemsize, "payload")
    return np.frombuffer(payload, dtype=dtype).reshape(dims).astype(dtype.newbyteorder("="))


def write_tensor(path, arr) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_tensor(arr))


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        arr = decode_tensor(fh)
        if arr is None:
            raise TensorFileError(f"{path}: empty file")
        if fh.read(1):
            raise TensorFileError(f"{path}: trailing bytes after tensor")
    return arr


def read_records(path) -> list[np.ndarray]:
    out = []
    with open(path, "rb") as fh:
        while (arr := decode_tensor(fh)) is not None:
            out.append(arr)
    return out


def _fmt_list(values) -> str:
    return ",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(int(v))
                    for v in values)


def write_cache(path, cache: CompressedCache, extra: dict | None = None) -> None:
    """Write the cache records to ``path`` and its manifest to
    ``path + '.manifest'``."""
    buf = io.BytesIO()
    for name in CACHE_FIELDS:
        arr = getattr(cache, name)
        if name == "coreset_indices":
            arr = arr.astype(np.float64)  # exact for any realistic n
        buf.write(encode_tensor(arr))
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())

    lines = {
        "format": "wct-cache v1",
        "fields": ",".join(CACHE_FIELDS),
        "bins": str(cache.bins),
        "beta": repr(cache.beta),
        "per_bin_tau": _fmt_list(cache.per_bin_tau),
        "per_bin_radius": _fmt_list(cache.per_bin_radius),
        "bin_boundaries": _fmt_list(cache.bin_boundaries),
    }
    for k, v in (extra or {}).items():
        lines[k] = str(v)
    with open(manifest_path(path), "w", encoding="utf-8") as fh:
        fh.writelines(f"{k}={v}\n" for k, v in lines.items())


def manifest_path(path) -> str:
    return os.fspath(path) + ".manifest"


def read_manifest(path) -> dict[str, str]:
    out = {}
    with open(manifest_path(path), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise TensorFileError(f"malformed manifest line {line!r}")
            out[key] = value
    return out


def _parse_list(text: str, dtype) -> np.ndarray:
    return np.array([dtype(t) for t in text.split(",") if t], dtype=dtype)


def read_cache(path) -> CompressedCache:
    records = read_records(path)
    if len(records) != len(CACHE_FIELDS):
        raise TensorFileError(f"{path}: expected {len(CACHE_FIELDS)} records, got {len(records)}")
    meta = read_manifest(path)
    try:
        fields = {name: np.asarray(arr, dtype=np.float64) for name, arr in zip(CACHE_FIELDS, records)}
        fields["coreset_indices"] = fields["coreset_indices"].astype(np.int64)
        return CompressedCache(
            **fields,
            beta=float(meta["beta"]),
            bins=int(meta["bins"]),
            bin_boundaries=_parse_list(meta["bin_boundaries"], int),
            per_bin_tau=_parse_list(meta["per_bin_tau"], float),
            per_bin_radius=_parse_list(meta.get("per_bin_radius", ""), float),
        )
    except (KeyError, ValueError) as exc:
        raise TensorFileError(f"{path}: bad manifest ({exc})") from exc
