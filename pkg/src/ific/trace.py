"""Fixed-schema run traces: preallocated storage, hashing and CSV round trips.

A trace is a dense float64 table with one row per control cycle.  The column
schema is fixed so hashes are comparable across runs and the CSV layout is
stable.  Values are written with 17 significant digits, which round-trips
float64 exactly.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import pandas as pd

SCHEMA_VERSION = 1

_AXES = ("x", "y", "z", "rx", "ry", "rz")

# (name, width) in storage order
SCHEMA: tuple[tuple[str, int], ...] = (
    ("t", 1),
    ("pose", 6),
    ("twist", 6),
    ("xd_mod", 6),
    ("vd_mod", 6),
    ("xdot_d", 6),
    ("pose_err", 6),
    ("vel_err", 6),
    ("f_ext", 6),
    ("f_ext_plant", 6),
    ("f_d_shaped", 6),
    ("f_f", 6),
    ("f_f_mod", 6),
    ("f_imp", 6),
    ("f_total", 6),
    ("sub1", 6),
    ("sub2", 6),
    ("sub3", 6),
    ("sub4", 6),
    ("accel_ff", 6),
    ("p_c", 1),
    ("p_u", 1),
    ("power_f", 1),
    ("power_i", 1),
    ("e_ft", 1),
    ("e_fi", 1),
    ("e_it", 1),
    ("e_ii", 1),
    ("d_ft", 1),
    ("d_fi", 1),
    ("d_it", 1),
    ("d_ii", 1),
    ("lambda_c", 1),
    ("gate_c", 1),
    ("gate_u", 1),
    ("ds_e", 1),
    ("ds_h", 1),
    ("surface_h", 1),
    ("env_fz", 1),
    ("human_active", 1),
    ("discard_f", 1),
    ("suppress_f", 1),
    ("discard_i", 1),
    ("suppress_i", 1),
)


def _offsets() -> dict[str, tuple[int, int]]:
    out = {}
    pos = 0
    for name, width in SCHEMA:
        out[name] = (pos, width)
        pos += width
    return out


OFFSETS = _offsets()
WIDTH = sum(w for _, w in SCHEMA)


def column_names() -> list[str]:
    names = []
    for name, width in SCHEMA:
        if width == 1:
            names.append(name)
        else:
            names.extend(f"{name}_{ax}" for ax in _AXES)
    return names


class Trace:
    """Preallocated per-cycle log with named scalar columns and 6-wide blocks."""

    def __init__(self, n_rows: int, meta: dict | None = None):
        self.data = np.zeros((n_rows, WIDTH))
        self.n = 0
        self.meta = dict(meta or {})
        self.meta.setdefault("schema_version", SCHEMA_VERSION)

    def row_view(self) -> np.ndarray:
        """Writable view of the next row; call commit() once it is filled."""
        if self.n >= self.data.shape[0]:
            raise IndexError("trace is full")
        return self.data[self.n]

    def commit(self) -> None:
        self.n += 1

    def set(self, row: np.ndarray, name: str, value) -> None:
        start, width = OFFSETS[name]
        row[start:start + width] = value

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, name: str) -> np.ndarray:
        start, width = OFFSETS[name]
        if width != 1:
            raise KeyError(f"{name} is a {width}-wide block, use block()")
        return self.data[: self.n, start]

    def block(self, name: str) -> np.ndarray:
        start, width = OFFSETS[name]
        return self.data[: self.n, start:start + width]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.int64(SCHEMA_VERSION).tobytes())
        h.update(self.data[: self.n].tobytes())
        return h.hexdigest()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.data[: self.n], columns=column_names())

    def save(self, path: str | Path) -> None:
        """Write the trace as CSV plus a JSON metadata sidecar."""
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        sidecar = path.with_suffix(path.suffix + ".meta.json")
        sidecar.write_text(json.dumps(self.meta, indent=2, default=_jsonable))

    @classmethod
    def load(cls, path: str | Path) -> "Trace":
        path = Path(path)
        frame = pd.read_csv(path, float_precision="round_trip")
        if list(frame.columns) != column_names():
            raise ValueError(f"{path} does not match the trace schema")
        trace = cls(len(frame))
        trace.data[:] = frame.to_numpy(dtype=float)
        trace.n = len(frame)
        sidecar = path.with_suffix(path.suffix + ".meta.json")
        if sidecar.exists():
            trace.meta = json.loads(sidecar.read_text())
        return trace


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")
