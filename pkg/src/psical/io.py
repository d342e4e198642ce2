"""Binary field/matrix formats and CSV/JSON reports.

GSF1 (field)::

    b"GSF1" | u32 dim | dim x {f64 center, f64 halfwidth, u32 count, u8 role}
    | complex samples as interleaved little-endian f64 (re, im), row-major

GSM1 (operator matrix)::

    b"GSM1" | u32 rows | u32 cols | target grid header | source grid header
    | complex entries as interleaved f64 pairs, row-major

A grid header is ``u32 dim`` followed by the per-axis records (role byte 0).
STFT data is a GSF1 file plus a JSON sidecar naming the window file and
carrying ``window_l2``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError
from .grid import FREQUENCY, SPACE, Field, Grid
from .quantize import OperatorMatrix
from .stft import StftData

FIELD_MAGIC = b"GSF1"
MATRIX_MAGIC = b"GSM1"
_AXIS = struct.Struct("<ddIB")
_ROLE_CODE = {SPACE: 0, FREQUENCY: 1}
_CODE_ROLE = {v: k for k, v in _ROLE_CODE.items()}


def _grid_header(grid: Grid, roles: Sequence[str] | None = None) -> bytes:
    roles = roles or (SPACE,) * grid.dim
    out = [struct.pack("<I", grid.dim)]
    for k in range(grid.dim):
        out.append(_AXIS.pack(grid.center[k], grid.halfwidth[k], grid.count[k], _ROLE_CODE[roles[k]]))
    return b"".join(out)


def _read_grid(buf: memoryview, pos: int) -> tuple[Grid, tuple[str, ...], int]:
    if len(buf) < pos + 4:
        raise FormatError("truncated grid header")
    (dim,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    if dim == 0 or dim > 16:
        raise FormatError(f"implausible dimension {dim}")
    centers, halfs, counts, roles = [], [], [], []
    for _ in range(dim):
        if len(buf) < pos + _AXIS.size:
            raise FormatError("truncated axis record")
        c, L, n, r = _AXIS.unpack_from(buf, pos)
        pos += _AXIS.size
        if r not in _CODE_ROLE:
            raise FormatError(f"unknown role code {r}")
        centers.append(c)
        halfs.append(L)
        counts.append(n)
        roles.append(_CODE_ROLE[r])
    try:
        grid = Grid(tuple(centers), tuple(halfs), tuple(counts))
    except Exception as exc:
        raise FormatError(f"invalid grid in header: {exc}") from exc
    return grid, tuple(roles), pos


def _pairs(values: np.ndarray) -> bytes:
    return np.ascontiguousarray(values, dtype="<c16").reshape(-1).view("<f8").tobytes()


def _unpairs(buf: memoryview, pos: int, n: int) -> np.ndarray:
    need = 16 * n
    if len(buf) - pos != need:
        raise FormatError(f"payload has {len(buf) - pos} bytes, expected {need}")
    return np.frombuffer(buf, dtype="<f8", count=2 * n, offset=pos).view(np.complex128).copy()


def field_to_bytes(f: Field) -> bytes:
    return FIELD_MAGIC + _grid_header(f.grid, f.roles) + _pairs(f.values)


def field_from_bytes(data: bytes) -> Field:
    buf = memoryview(data)
    if bytes(buf[:4]) != FIELD_MAGIC:
        raise FormatError("not a GSF1 file")
    grid, roles, pos = _read_grid(buf, 4)
    vals = _unpairs(buf, pos, grid.size)
    return Field(grid, vals.reshape(grid.shape), roles)


def write_field(path, f: Field) -> Path:
    path = Path(path)
    path.write_bytes(field_to_bytes(f))
    return path


def read_field(path) -> Field:
    return field_from_bytes(Path(path).read_bytes())


def matrix_to_bytes(M: OperatorMatrix) -> bytes:
    rows, cols = M.matrix.shape
    return (MATRIX_MAGIC + struct.pack("<II", rows, cols) + _grid_header(M.target) + _grid_header(M.source)
            + _pairs(M.matrix))


def matrix_from_bytes(data: bytes) -> OperatorMatrix:
    buf = memoryview(data)
    if bytes(buf[:4]) != MATRIX_MAGIC:
        raise FormatError("not a GSM1 file")
    if len(buf) < 12:
        raise FormatError("truncated GSM1 header")
    rows, cols = struct.unpack_from("<II", buf, 4)
    target, _, pos = _read_grid(buf, 12)
    source, _, pos = _read_grid(buf, pos)
    if (rows, cols) != (target.size, source.size):
        raise FormatError("matrix shape does not match its grids")
    vals = _unpairs(buf, pos, rows * cols)
    return OperatorMatrix(vals.reshape(rows, cols), source, target)


def write_matrix(path, M: OperatorMatrix) -> Path:
    path = Path(path)
    path.write_bytes(matrix_to_bytes(M))
    return path


def read_matrix(path) -> OperatorMatrix:
    return matrix_from_bytes(Path(path).read_bytes())


def write_stft(path, V: StftData) -> tuple[Path, Path, Path]:
    """Write ``path`` (GSF1 values), ``path.window.gsf`` and the ``path.json`` sidecar."""
    path = Path(path)
    window_path = path.with_name(path.name + ".window.gsf")
    sidecar = path.with_name(path.name + ".json")
    write_field(path, V.values)
    write_field(window_path, V.window)
    sidecar.write_text(json.dumps({"window": window_path.name, "window_l2": V.window_l2}, sort_keys=True))
    return path, window_path, sidecar


def read_stft(path) -> StftData:
    path = Path(path)
    sidecar = path.with_name(path.name + ".json")
    try:
        meta = json.loads(sidecar.read_text())
        window = read_field(path.with_name(meta["window"]))
        l2 = float(meta["window_l2"])
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"bad STFT sidecar {sidecar}: {exc}") from exc
    return StftData(read_field(path), window, l2)


# -- reports ---------------------------------------------------------------------------


def _plain(value):
    if is_dataclass(value):
        return _plain(asdict(value))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def to_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2)


def rows_to_csv(rows: Iterable[dict]) -> str:
    rows = [_plain(r) for r in rows]
    buf = io.StringIO()
    if not rows:
        return ""
    keys = list(rows[0])
    for r in rows[1:]:
        keys += [k for k in r if k not in keys]
    writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _fmt(r.get(k, "")) for k in keys})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return v


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
