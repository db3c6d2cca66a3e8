"""Binary field snapshots of a half-wave state.

Layout (all little-endian)::

    b"MKGF"                      magic
    uint32                       format version (1)
    uint32                       grid size n
    float64 x 3                  L, m, t
    complex fields x 10          phi_plus, phi_minus, A_plus[0..3], A_minus[0..3]
    float64 x 8                  zero-mode registers (mean A_mu, mean dA_mu/dt), mu = 0..3

Each field is the array of Fourier coefficients of the state (the evolved
representation, so a save/load round trip is bit-exact), stored as
interleaved ``(re, im)`` float64 pairs with the first index varying
fastest.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import SnapshotError
from .gauge_data import HalfWaveState
from .grid import make_grid

__all__ = ["MAGIC", "VERSION", "write_snapshot", "read_snapshot", "snapshot_bytes", "state_from_bytes"]

MAGIC = b"MKGF"
VERSION = 1
_HEADER = struct.Struct("<4sII3d")
_FIELDS = 10


def _fields(state: HalfWaveState) -> list[np.ndarray]:
    return [state.phi_plus, state.phi_minus, *state.A_plus, *state.A_minus]


def snapshot_bytes(state: HalfWaveState) -> bytes:
    """Serialize a state to the snapshot format."""
    g = state.grid
    parts = [_HEADER.pack(MAGIC, VERSION, g.n, float(g.L), float(state.m), float(state.t))]
    for f in _fields(state):
        flat = np.asarray(f, dtype="<c16").reshape(-1, order="F")
        parts.append(flat.view("<f8").tobytes())
    parts.append(np.asarray(state.zero_mode, dtype="<f8").reshape(-1).tobytes())
    return b"".join(parts)


def state_from_bytes(data: bytes) -> HalfWaveState:
    """Inverse of :func:`snapshot_bytes`.

    Raises
    ------
    SnapshotError
        Wrong magic, unsupported version or truncated payload.
    """
    if len(data) < _HEADER.size:
        raise SnapshotError("snapshot shorter than its header")
    magic, version, n, L, m, t = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    count = n**3
    expected = _HEADER.size + _FIELDS * count * 16 + 8 * 8
    if len(data) != expected:
        raise SnapshotError(f"snapshot has {len(data)} bytes, expected {expected}")
    offset = _HEADER.size
    arrays = []
    for _ in range(_FIELDS):
        flat = np.frombuffer(data, dtype="<f8", count=2 * count, offset=offset).view("<c16")
        arrays.append(flat.reshape((n, n, n), order="F").astype(complex))
        offset += 16 * count
    zero_mode = np.frombuffer(data, dtype="<f8", count=8, offset=offset).reshape(4, 2).astype(float)
    grid = make_grid(n, L)
    return HalfWaveState(
        grid=grid,
        m=float(m),
        t=float(t),
        phi_plus=arrays[0],
        phi_minus=arrays[1],
        A_plus=np.stack(arrays[2:6]),
        A_minus=np.stack(arrays[6:10]),
        zero_mode=zero_mode.copy(),
    )


def write_snapshot(path: str | Path, state: HalfWaveState) -> Path:
    """Write ``state`` to ``path``; returns the path."""
    path = Path(path)
    path.write_bytes(snapshot_bytes(state))
    return path


def read_snapshot(path: str | Path) -> HalfWaveState:
    """Read a snapshot file."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from None
    return state_from_bytes(data)
