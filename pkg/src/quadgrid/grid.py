"""Structured grid storage and corner-stencil geometry.

A structured grid is an ni x nj lattice of 2D nodes.  Every interior node is
surrounded by four quadrilateral cells; per (node, cell) pair we build a
corner frame holding the two covariant edge vectors g1 (along the i grid
direction) and g2 (along the j direction).  The frame's Jacobian determinant
is the signed corner area: positive for all corners of a fold-free grid.

The difference stencils are orientation-normalized per quadrant (forward or
backward differences chosen so a uniform Cartesian grid has determinant +1 in
all four quadrants).  Without that normalization the raw one-sided
differences alternate sign between quadrants and "determinant > 0" would not
be usable as the fold-free criterion.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DegenerateFrameError


class Point2(NamedTuple):
    x: float
    y: float


class GridIndex(NamedTuple):
    i: int
    j: int


class Quadrant(Enum):
    """Which of the four cells around a node a corner frame belongs to."""

    NE = 0
    NW = 1
    SW = 2
    SE = 3


QUADRANTS = (Quadrant.NE, Quadrant.NW, Quadrant.SW, Quadrant.SE)


@dataclass(frozen=True)
class CornerFrame:
    """Covariant vectors of one (node, quadrant-cell) corner.

    g1 and g2 are the columns of the corner Jacobian matrix; the metric
    coefficients g11, g12, g22 are their pairwise dot products and
    det**2 == gdet up to roundoff.
    """

    g1: np.ndarray
    g2: np.ndarray
    quadrant: Quadrant

    @property
    def jacobian(self) -> np.ndarray:
        return np.column_stack([self.g1, self.g2])

    @property
    def det(self) -> float:
        return float(self.g1[0] * self.g2[1] - self.g1[1] * self.g2[0])

    @property
    def g11(self) -> float:
        return float(self.g1 @ self.g1)

    @property
    def g12(self) -> float:
        return float(self.g1 @ self.g2)

    @property
    def g22(self) -> float:
        return float(self.g2 @ self.g2)

    @property
    def gdet(self) -> float:
        return self.g11 * self.g22 - self.g12 ** 2


class StructuredGrid:
    """An ni x nj lattice of 2D points.

    Coordinates live in ``xy``, a float64 array of shape (ni, nj, 2) indexed
    as ``xy[i, j]``.  In flattened form (files, flat node lists) nodes are
    row-major with i fastest: flat index ``j * ni + i``.

    Boundary nodes (i in {0, ni-1} or j in {0, nj-1}) are held fixed by the
    optimizer; only the construction code writes them.
    """

    __slots__ = ("xy",)

    def __init__(self, xy: np.ndarray):
        xy = np.asarray(xy, dtype=np.float64)
        if xy.ndim != 3 or xy.shape[2] != 2:
            raise ValueError(f"expected coordinate array of shape (ni, nj, 2), got {xy.shape}")
        if xy.shape[0] < 2 or xy.shape[1] < 2:
            raise ValueError(f"grid must be at least 2x2, got {xy.shape[0]}x{xy.shape[1]}")
        if not np.all(np.isfinite(xy)):
            raise ValueError("grid coordinates must be finite")
        self.xy = xy

    @classmethod
    def from_flat(cls, ni: int, nj: int, nodes) -> "StructuredGrid":
        """Build from a flat node sequence in j-outer, i-inner order."""
        arr = np.asarray(nodes, dtype=np.float64).reshape(nj, ni, 2)
        return cls(arr.transpose(1, 0, 2).copy())

    def to_flat(self) -> np.ndarray:
        """Nodes as an (ni*nj, 2) array, j outer, i inner."""
        return self.xy.transpose(1, 0, 2).reshape(-1, 2)

    @property
    def ni(self) -> int:
        return self.xy.shape[0]

    @property
    def nj(self) -> int:
        return self.xy.shape[1]

    def point(self, i: int, j: int) -> Point2:
        return Point2(float(self.xy[i, j, 0]), float(self.xy[i, j, 1]))

    def is_interior(self, i: int, j: int) -> bool:
        return 0 < i < self.ni - 1 and 0 < j < self.nj - 1

    def interior_indices(self) -> Iterator[GridIndex]:
        """Interior nodes in sweep order: j outer, i inner."""
        for j in range(1, self.nj - 1):
            for i in range(1, self.ni - 1):
                yield GridIndex(i, j)

    def copy(self) -> "StructuredGrid":
        return StructuredGrid(self.xy.copy())

    def bbox(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) over all nodes."""
        x = self.xy[..., 0]
        y = self.xy[..., 1]
        return float(x.min()), float(y.min()), float(x.max()), float(y.max())

    def bbox_diagonal(self) -> float:
        xmin, ymin, xmax, ymax = self.bbox()
        return float(np.hypot(xmax - xmin, ymax - ymin))

    def __eq__(self, other) -> bool:
        if not isinstance(other, StructuredGrid):
            return NotImplemented
        return self.xy.shape == other.xy.shape and bool(np.all(self.xy == other.xy))

    def __repr__(self) -> str:
        return f"StructuredGrid(ni={self.ni}, nj={self.nj})"


def corner_frames(grid: StructuredGrid, k) -> tuple[CornerFrame, CornerFrame, CornerFrame, CornerFrame]:
    """The four corner frames rooted at interior node k, ordered NE, NW, SW, SE.

    NE uses forward differences in both directions; NW/SW/SE flip to backward
    differences where the neighbor lies on the negative side, keeping all four
    determinants positive on a uniform grid.
    """
    i, j = k
    if not grid.is_interior(i, j):
        raise ValueError(f"corner frames require an interior node, got (i={i}, j={j})")
    p = grid.xy[i, j]
    e = grid.xy[i + 1, j]
    w = grid.xy[i - 1, j]
    n = grid.xy[i, j + 1]
    s = grid.xy[i, j - 1]
    return (
        CornerFrame(e - p, n - p, Quadrant.NE),
        CornerFrame(p - w, n - p, Quadrant.NW),
        CornerFrame(p - w, p - s, Quadrant.SW),
        CornerFrame(e - p, p - s, Quadrant.SE),
    )


def condition_number(frame: CornerFrame) -> float:
    """Frobenius condition number (g11 + g22) / det of the corner Jacobian.

    Bounded below by 2, attained exactly when g11 == g22 and g12 == 0.
    """
    det = frame.det
    if det <= 0.0:
        raise DegenerateFrameError(
            f"condition number undefined for determinant {det!r} <= 0"
        )
    return (frame.g11 + frame.g22) / det


def interior_corner_vectors(xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Covariant vectors of every interior corner, vectorized.

    Returns (g1, g2), each of shape (ni-2, nj-2, 4, 2); axis 2 runs over
    quadrants in NE, NW, SW, SE order.
    """
    p = xy[1:-1, 1:-1]
    e = xy[2:, 1:-1]
    w = xy[:-2, 1:-1]
    n = xy[1:-1, 2:]
    s = xy[1:-1, :-2]
    g1 = np.stack([e - p, p - w, p - w, e - p], axis=2)
    g2 = np.stack([n - p, n - p, p - s, p - s], axis=2)
    return g1, g2


def interior_corner_dets(xy: np.ndarray) -> np.ndarray:
    """Jacobian determinant of every interior corner, shape (ni-2, nj-2, 4)."""
    g1, g2 = interior_corner_vectors(xy)
    return g1[..., 0] * g2[..., 1] - g1[..., 1] * g2[..., 0]


def interior_corner_centroids(xy: np.ndarray) -> np.ndarray:
    """Centroid of each corner triangle (node plus its two quadrant
    neighbors), shape (ni-2, nj-2, 4, 2).  This is where adaptive weight
    functions are sampled."""
    p = xy[1:-1, 1:-1]
    e = xy[2:, 1:-1]
    w = xy[:-2, 1:-1]
    n = xy[1:-1, 2:]
    s = xy[1:-1, :-2]
    d1 = np.stack([e - p, w - p, w - p, e - p], axis=2)
    d2 = np.stack([n - p, n - p, s - p, s - p], axis=2)
    return p[:, :, None, :] + (d1 + d2) / 3.0


def folded_corner_count(grid: StructuredGrid) -> int:
    """Number of interior corners with non-positive determinant."""
    if grid.ni < 3 or grid.nj < 3:
        return 0
    return int(np.count_nonzero(interior_corner_dets(grid.xy) <= 0.0))
