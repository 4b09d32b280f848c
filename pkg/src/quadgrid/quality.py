"""Mesh quality auditing: fold detection, condition numbers, cell areas."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functionals import FunctionalKind, global_value
from .grid import StructuredGrid, interior_corner_vectors


@dataclass(frozen=True)
class QualityReport:
    """Aggregate statistics over all interior corner frames and cells.

    Condition-number statistics skip folded corners (det <= 0); the fold
    count reports them separately.  ``global_functional_value`` is +inf when
    a barrier functional is requested on a folded grid.  Cell areas are
    signed (shoelace); negative minimum means an inverted cell.
    """

    min_corner_det: float
    max_corner_det: float
    folded_corner_count: int
    mean_condition_number: float
    max_condition_number: float
    max_orthogonality_deviation: float
    cell_area_min: float
    cell_area_mean: float
    cell_area_max: float
    global_functional_value: float
    functional: str

    def lines(self) -> list[str]:
        out = []
        for key in (
            "min_corner_det",
            "max_corner_det",
            "folded_corner_count",
            "mean_condition_number",
            "max_condition_number",
            "max_orthogonality_deviation",
            "cell_area_min",
            "cell_area_mean",
            "cell_area_max",
            "global_functional_value",
            "functional",
        ):
            out.append(f"{key} = {getattr(self, key)!r}" if key != "functional" else f"{key} = {self.functional}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


def cell_areas(grid: StructuredGrid) -> np.ndarray:
    """Signed shoelace area of every cell, shape (ni-1, nj-1).

    Positive for counterclockwise (right-handed) cells.
    """
    xy = grid.xy
    a = xy[:-1, :-1]
    b = xy[1:, :-1]
    c = xy[1:, 1:]
    d = xy[:-1, 1:]
    return 0.5 * (
        (a[..., 0] * b[..., 1] - b[..., 0] * a[..., 1])
        + (b[..., 0] * c[..., 1] - c[..., 0] * b[..., 1])
        + (c[..., 0] * d[..., 1] - d[..., 0] * c[..., 1])
        + (d[..., 0] * a[..., 1] - a[..., 0] * d[..., 1])
    )


def quality_report(grid: StructuredGrid, kind: FunctionalKind) -> QualityReport:
    """Audit the grid; folds are reported, never raised."""
    areas = cell_areas(grid)

    if grid.ni < 3 or grid.nj < 3:
        # no interior corners at all
        min_det = max_det = math.nan
        folded = 0
        mean_cn = max_cn = math.nan
        max_ortho = math.nan
    else:
        g1, g2 = interior_corner_vectors(grid.xy)
        g11 = np.einsum("...k,...k->...", g1, g1)
        g22 = np.einsum("...k,...k->...", g2, g2)
        g12 = np.einsum("...k,...k->...", g1, g2)
        det = g1[..., 0] * g2[..., 1] - g1[..., 1] * g2[..., 0]

        min_det = float(det.min())
        max_det = float(det.max())
        folded = int(np.count_nonzero(det <= 0.0))

        ok = det > 0.0
        if np.any(ok):
            cn = (g11[ok] + g22[ok]) / det[ok]
            mean_cn = float(cn.mean())
            max_cn = float(cn.max())
        else:
            mean_cn = max_cn = math.nan

        denom = g11 * g22
        nz = denom > 0.0
        if np.any(nz):
            max_ortho = float((np.abs(g12[nz]) / np.sqrt(denom[nz])).max())
        else:
            max_ortho = math.nan

    try:
        gval = global_value(grid, kind)
    except Exception:
        gval = math.inf  # barrier kind on a folded grid

    return QualityReport(
        min_corner_det=min_det,
        max_corner_det=max_det,
        folded_corner_count=folded,
        mean_condition_number=mean_cn,
        max_condition_number=max_cn,
        max_orthogonality_deviation=max_ortho,
        cell_area_min=float(areas.min()),
        cell_area_mean=float(areas.mean()),
        cell_area_max=float(areas.max()),
        global_functional_value=gval,
        functional=kind.label(),
    )
