"""Self-describing CSV grids and binary PGM images.

CSV layout::

    # pbec-grid v1
    # k_axis 1/m: <comma separated>
    # omega_axis rad/s: <comma separated>
    # <key>: <value>          (provenance, any number of lines)
    <one comma separated row per omega, ascending>

Numbers carry 17 significant digits so floats round-trip exactly.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .grids import SpectrumGrid

MAGIC = "# pbec-grid v1"


def _fmt(x) -> str:
    return "%.17g" % x


def atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_grid(col_axis, row_axis, values, col_name=("k_axis", "1/m"), row_name=("omega_axis", "rad/s"),
                meta: dict | None = None) -> str:
    lines = [
        MAGIC,
        f"# {col_name[0]} {col_name[1]}: " + ",".join(map(_fmt, col_axis)),
        f"# {row_name[0]} {row_name[1]}: " + ",".join(map(_fmt, row_axis)),
    ]
    for key, val in (meta or {}).items():
        lines.append(f"# {key}: {val}")
    lines += [",".join(map(_fmt, row)) for row in np.asarray(values)]
    return "\n".join(lines) + "\n"


def write_grid(path, col_axis, row_axis, values, **kw) -> None:
    atomic_write(path, format_grid(col_axis, row_axis, values, **kw).encode("utf-8"))


def write_spectrum(path, grid: SpectrumGrid, meta: dict | None = None) -> None:
    write_grid(path, grid.k_axis, grid.omega_axis, grid.values, meta=meta)


def read_grid(path):
    """Return ``(col_axis, row_axis, values, header)``; header maps names to strings."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0].strip() != MAGIC:
        raise ValueError(f"{path}: not a pbec grid file")
    header, rows, axes = {}, [], []
    for ln in text[1:]:
        if ln.startswith("#"):
            key, _, val = ln[1:].strip().partition(":")
            header[key.strip()] = val.strip()
            if len(axes) < 2 and key.split()[0].endswith("_axis"):
                axes.append(np.array([float(v) for v in val.split(",")]))
        elif ln.strip():
            rows.append([float(v) for v in ln.split(",")])
    if len(axes) != 2:
        raise ValueError(f"{path}: missing axis lines")
    values = np.array(rows, dtype=float).reshape(axes[1].size, axes[0].size)
    return axes[0], axes[1], values, header


def read_spectrum(path) -> SpectrumGrid:
    k, w, v, _ = read_grid(path)
    return SpectrumGrid(k, w, v)


def pgm_bytes(grid: SpectrumGrid, bit_depth: int) -> bytes:
    """Binary P5 image: rows run from highest to lowest omega, columns by k."""
    maxval = 2**bit_depth - 1
    v = np.asarray(grid.values)[::-1, :]
    if np.any(v < 0) or np.any(v > maxval) or np.any(v != np.rint(v)):
        raise ValueError("PGM values must be integers in [0, 2**bit_depth - 1]")
    dtype = ">u2" if maxval > 255 else "u1"
    head = f"P5\n{v.shape[1]} {v.shape[0]}\n{maxval}\n".encode("ascii")
    return head + v.astype(dtype).tobytes()


def write_pgm(path, grid: SpectrumGrid, bit_depth: int) -> None:
    atomic_write(path, pgm_bytes(grid, bit_depth))


def read_pgm(path) -> np.ndarray:
    """Pixel array as stored (top row first)."""
    data = Path(path).read_bytes()
    parts, pos = [], 0
    while len(parts) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        parts.append(data[start:pos].decode("ascii"))
    pos += 1
    if parts[0] != "P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(data[pos:], dtype=dtype).reshape(h, w).astype(np.int64)
