"""Diagnostic CSV rows and binary field snapshots.

Snapshot layout (all little-endian)::

    offset  type        content
    0       8 bytes     magic b"SGFIELD1"
    8       uint32      ndim (1..3)
    12      uint32      ncomp (1 scalar, 3 vector)
    16      uint32[3]   points per axis (unused axes = 1)
    28      float64[3]  box length per axis (unused axes = 0)
    52      float64     time
    60      uint32      byte length L of the field name
    64      L bytes     field name, UTF-8
    64+L    float64[]   samples, component-major then C order over the axes

Next to ``name.sgf`` a plain-text sidecar ``name.sgf.txt`` repeats the header
as ``key = value`` lines together with the grid backend.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .grid import Grid, ScalarField, VectorField

MAGIC = b"SGFIELD1"
_HEADER = struct.Struct("<8sII3I3ddI")


def write_snapshot(path, field, name: str, time: float) -> Path:
    path = Path(path)
    grid = field.grid
    ncomp = 3 if isinstance(field, VectorField) else 1
    dims = list(grid.shape) + [1] * (3 - grid.ndim)
    lengths = list(grid.lengths) + [0.0] * (3 - grid.ndim)
    name_bytes = name.encode("utf-8")
    header = _HEADER.pack(MAGIC, grid.ndim, ncomp, *dims, *lengths, float(time), len(name_bytes))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(name_bytes)
        fh.write(np.ascontiguousarray(field.data, dtype="<f8").tobytes())
    meta = {
        "format": MAGIC.decode(),
        "name": name,
        "time": repr(float(time)),
        "ndim": grid.ndim,
        "ncomp": ncomp,
        "dims": " ".join(str(n) for n in grid.shape),
        "lengths": " ".join(repr(x) for x in grid.lengths),
        "backend": grid.backend,
        "dtype": "float64 little-endian",
        "order": "component-major, C order",
    }
    with open(str(path) + ".txt", "w") as fh:
        for key, value in meta.items():
            fh.write(f"{key} = {value}\n")
    return path


def read_snapshot(path, backend=None):
    """Return ``(field, name, time)``. Backend comes from the sidecar when present."""
    path = Path(path)
    raw = path.read_bytes()
    magic, ndim, ncomp, n0, n1, n2, l0, l1, l2, time, name_len = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a symgauge snapshot (magic {magic!r})")
    offset = _HEADER.size
    name = raw[offset : offset + name_len].decode("utf-8")
    offset += name_len
    shape = (n0, n1, n2)[:ndim]
    lengths = (l0, l1, l2)[:ndim]
    if backend is None:
        backend = "spectral"
        sidecar = Path(str(path) + ".txt")
        if sidecar.exists():
            for line in sidecar.read_text().splitlines():
                key, _, value = line.partition("=")
                if key.strip() == "backend":
                    backend = value.strip()
    grid = Grid(shape, lengths, backend)
    data = np.frombuffer(raw, dtype="<f8", offset=offset).astype(float)
    if ncomp == 3:
        return VectorField(grid, data.reshape((3,) + shape)), name, time
    return ScalarField(grid, data.reshape(shape)), name, time


class CsvSeries:
    """Append-only CSV with a fixed header row."""

    def __init__(self, path, columns):
        self.path = Path(path)
        self.columns = tuple(columns)
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(self.columns)

    def write(self, row):
        if isinstance(row, dict):
            row = [row[c] for c in self.columns]
        self._writer.writerow([repr(float(v)) for v in row])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_csv(path):
    """Return ``(columns, array)`` for a file written by :class:`CsvSeries`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[float(v) for v in r] for r in reader]
    return columns, np.array(rows, dtype=float).reshape(-1, len(columns))
