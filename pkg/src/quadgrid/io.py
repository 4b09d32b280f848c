"""Grid serialization: native text format, VTK legacy ASCII, and SVG.

Native format ("quadgrid 1"):

    quadgrid 1
    <ni> <nj>
    <x> <y>          one line per node, j outer, i inner (i fastest)

Coordinates are written with shortest round-trip precision, so
write -> read is the identity on grids, bit for bit.  All writers are
atomic: content goes to a temporary file which is renamed into place.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import GridFormatError
from .grid import StructuredGrid

FORMAT_HEADER = "quadgrid 1"
FORMATS = ("native", "vtk", "svg")


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_grid(grid: StructuredGrid, path) -> None:
    """Write the native text format."""
    lines = [FORMAT_HEADER, f"{grid.ni} {grid.nj}"]
    for x, y in grid.to_flat():
        lines.append(f"{float(x)!r} {float(y)!r}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_grid(path) -> StructuredGrid:
    """Read the native text format; errors carry the offending line number."""
    numbered = []
    with open(path, "r") as handle:
        for lineno, raw in enumerate(handle, start=1):
            stripped = raw.strip()
            if stripped:
                numbered.append((lineno, stripped))
    if not numbered:
        raise GridFormatError("empty grid file", line=1)
    lineno, header = numbered[0]
    if header != FORMAT_HEADER:
        raise GridFormatError(f"expected header {FORMAT_HEADER!r}, got {header!r}", line=lineno)
    if len(numbered) < 2:
        raise GridFormatError("missing dimensions line", line=lineno + 1)
    lineno, dims = numbered[1]
    parts = dims.split()
    if len(parts) != 2:
        raise GridFormatError(f"expected 'ni nj', got {dims!r}", line=lineno)
    try:
        ni, nj = int(parts[0]), int(parts[1])
    except ValueError:
        raise GridFormatError(f"non-integer dimensions {dims!r}", line=lineno) from None
    if ni < 2 or nj < 2:
        raise GridFormatError(f"grid must be at least 2x2, got {ni}x{nj}", line=lineno)
    expected = ni * nj
    node_lines = numbered[2:]
    if len(node_lines) != expected:
        raise GridFormatError(
            f"expected {expected} node lines for a {ni}x{nj} grid, found {len(node_lines)}",
            line=node_lines[-1][0] if node_lines else lineno,
        )
    nodes = np.empty((expected, 2), dtype=np.float64)
    for row, (lineno, text) in enumerate(node_lines):
        parts = text.split()
        if len(parts) != 2:
            raise GridFormatError(f"expected 'x y', got {text!r}", line=lineno)
        try:
            nodes[row, 0] = float(parts[0])
            nodes[row, 1] = float(parts[1])
        except ValueError:
            raise GridFormatError(f"invalid coordinate in {text!r}", line=lineno) from None
    if not np.all(np.isfinite(nodes)):
        raise GridFormatError("non-finite coordinate in grid file")
    return StructuredGrid.from_flat(ni, nj, nodes)


def write_vtk(grid: StructuredGrid, path) -> None:
    """VTK legacy ASCII STRUCTURED_GRID with z = 0, same node order as the
    native format."""
    n = grid.ni * grid.nj
    lines = [
        "# vtk DataFile Version 3.0",
        "quadgrid structured mesh",
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {grid.ni} {grid.nj} 1",
        f"POINTS {n} double",
    ]
    for x, y in grid.to_flat():
        lines.append(f"{float(x)!r} {float(y)!r} 0")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_svg(grid: StructuredGrid, path, stroke: str = "black") -> None:
    """One polyline per grid row and per grid column, y flipped to screen
    convention, viewBox fitted with a 2% margin."""
    xy = grid.xy
    xmin, ymin, xmax, ymax = grid.bbox()
    width = xmax - xmin
    height = ymax - ymin
    scale = max(width, height)
    if scale <= 0.0:  # fully degenerate grid; keep a drawable viewBox
        scale = 1.0
    mx = 0.02 * (width if width > 0.0 else scale)
    my = 0.02 * (height if height > 0.0 else scale)
    vw = (width if width > 0.0 else scale) + 2 * mx
    vh = (height if height > 0.0 else scale) + 2 * my
    stroke_width = 0.004 * scale

    def map_point(x, y):
        return x - xmin + mx, (ymax - y) + my

    def polyline(points):
        coords = " ".join(f"{px!r},{py!r}" for px, py in points)
        return (
            f'<polyline fill="none" stroke="{stroke}" '
            f'stroke-width="{stroke_width!r}" points="{coords}"/>'
        )

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {vw!r} {vh!r}">',
    ]
    for j in range(grid.nj):
        lines.append(polyline([map_point(*xy[i, j]) for i in range(grid.ni)]))
    for i in range(grid.ni):
        lines.append(polyline([map_point(*xy[i, j]) for j in range(grid.nj)]))
    lines.append("</svg>")
    _atomic_write(path, "\n".join(lines) + "\n")
