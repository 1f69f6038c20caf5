"""Single-file array container.

Layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"RALM"
    4       4     format version, u32 (currently 1)
    8       8     header length L, u64
    16      L     header: UTF-8 JSON object, keys sorted, no whitespace
    16+L    ...   payload: raw little-endian float32 arrays, back to back

The header's ``arrays`` list gives each array's ``name``, ``shape``,
``offset`` (relative to the payload start) and ``nbytes``.  Arrays tile
the payload exactly, with no gaps and no trailing bytes, so every
payload byte belongs to some value.  Everything else goes under ``meta``.

Values are rounded to float32 on write.  Integer ids are stored as
float32 too, which is exact below 2**24.
"""
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from ..errors import FormatError

MAGIC = b"RALM"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sIQ")
_DTYPE = np.dtype("<f4")


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def atomic_write_bytes(path, chunks) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            for chunk in chunks:
                fh.write(chunk)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_container(path, arrays: dict, meta: dict, kind: str) -> None:
    entries, blobs, offset = [], [], 0
    for name, arr in arrays.items():
        a = np.ascontiguousarray(np.asarray(arr), dtype=_DTYPE)
        blob = a.tobytes()
        entries.append({"name": name, "shape": list(a.shape), "offset": offset, "nbytes": len(blob)})
        blobs.append(blob)
        offset += len(blob)
    header = canonical_json({"kind": kind, "dtype": "<f4", "arrays": entries, "meta": meta})
    prefix = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header))
    atomic_write_bytes(path, [prefix, header, *blobs])


def read_container(path, kind: str | None = None):
    """Return ``(arrays, meta)``; arrays are float32 NumPy arrays."""
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise FormatError(f"{path}: file too short for a container prefix ({len(data)} bytes)")
    magic, version, hlen = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic bytes {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    start = _PREFIX.size + hlen
    if start > len(data):
        raise FormatError(f"{path}: truncated header ({hlen} bytes declared, "
                          f"{len(data) - _PREFIX.size} present)")
    try:
        header = json.loads(data[_PREFIX.size:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header ({exc})") from None
    if kind is not None and header.get("kind") != kind:
        raise FormatError(f"{path}: expected a {kind!r} container, found {header.get('kind')!r}")
    payload = memoryview(data)[start:]
    arrays, expected = {}, 0
    for e in header.get("arrays", []):
        try:
            name, shape, off, nbytes = e["name"], tuple(e["shape"]), int(e["offset"]), int(e["nbytes"])
        except (KeyError, TypeError, ValueError):
            raise FormatError(f"{path}: malformed array entry {e!r}") from None
        if nbytes != int(np.prod(shape, dtype=np.int64)) * 4:
            raise FormatError(f"{path}: array {name!r} declares {nbytes} bytes for shape {shape}")
        if off != expected:
            raise FormatError(f"{path}: array {name!r} at offset {off}, expected {expected} "
                              "(arrays must tile the payload)")
        if off + nbytes > len(payload):
            raise FormatError(f"{path}: truncated payload: array {name!r} needs bytes "
                              f"[{off}, {off + nbytes}) of {len(payload)}")
        arrays[name] = np.frombuffer(payload[off:off + nbytes], dtype=_DTYPE).reshape(shape).copy()
        expected = off + nbytes
    if expected != len(payload):
        raise FormatError(f"{path}: header/payload mismatch: header covers {expected} bytes, "
                          f"payload has {len(payload)}")
    return arrays, header.get("meta", {})
