"""Node-local Gauss-Seidel optimization of grid functionals.

Each sweep visits interior nodes in lexicographic order (j outer, i inner)
and moves one node at a time: a Newton step on the node's 2x2 local problem
(analytic gradient, central finite-difference Hessian), falling back to
backtracked steepest descent when the Hessian is not positive definite or
the full Newton step fails the Armijo test.  For barrier functionals
(winslow, modliao) every candidate step additionally keeps all corner
determinants depending on the node strictly positive, so a fold-free grid
stays fold-free.

Barrier functionals are undefined on folded grids, but transfinite
interpolation can produce folded initial grids; ``optimize`` therefore runs
untangling sweeps first, descending the fold penalty

    sum over dependent corners of max(0, beta - det)**2

with beta a small fraction of the grid's mean absolute corner determinant.

Everything here is deterministic: fixed visit order, no randomization.  The
``rng_seed`` config field is reserved for randomized tie-breaking; the
current scheme has none, so it never affects results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FoldedGridError, QuadGridError, UntangleError
from .functionals import (
    FunctionalKind,
    corner_weight_cache,
    global_value_from_arrays,
    grid_to_lists,
    make_kernel,
    records_dets_positive,
    _flatten_weights,
    _stencil_records,
)
from .grid import GridIndex, Point2, StructuredGrid, interior_corner_dets
from .quality import QualityReport, quality_report

FD_STEP_SCALE = 1e-6  # Hessian finite-difference step, times the bbox diagonal


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-8                   # max node displacement / bbox diagonal
    max_sweeps: int = 500
    stencil: str = "full"
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 40
    untangle_margin_factor: float = 1e-3
    rng_seed: int = 0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise QuadGridError(f"tol must be positive, got {self.tol!r}")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise QuadGridError(f"backtrack_factor must be in (0, 1), got {self.backtrack_factor!r}")
        if self.max_sweeps < 1:
            raise QuadGridError(f"max_sweeps must be >= 1, got {self.max_sweeps!r}")
        if self.stencil not in ("own", "full"):
            raise QuadGridError(f"stencil must be 'own' or 'full', got {self.stencil!r}")
        if self.max_backtracks < 0:
            raise QuadGridError(f"max_backtracks must be >= 0, got {self.max_backtracks!r}")


@dataclass(frozen=True)
class SweepStats:
    sweep_index: int
    max_displacement: float             # relative to the bbox diagonal
    global_value_before: float
    global_value_after: float
    nodes_moved: int
    backtrack_failures: int


@dataclass
class OptimizeResult:
    grid: StructuredGrid
    converged: bool
    sweeps: list[SweepStats] = field(default_factory=list)
    final_quality: QualityReport | None = None
    untangle_sweeps: int = 0


def _bbox_diag(xy: np.ndarray) -> float:
    x = xy[..., 0]
    y = xy[..., 1]
    diag = math.hypot(float(x.max()) - float(x.min()), float(y.max()) - float(y.min()))
    return diag if diag > 0.0 else 1.0


def _descend(kernel, recs, extra, barrier, x0, y0, h, cfg):
    """One safeguarded descent step of the local objective.

    Returns (x, y, decrease, moved, failed).  ``failed`` marks a nonzero
    gradient for which no acceptable step was found.
    """
    ok, f0, gx, gy = kernel(recs, x0, y0)
    if not ok:
        raise FoldedGridError("local objective undefined: stencil contains a folded corner")
    gnorm2 = gx * gx + gy * gy
    if gnorm2 == 0.0:
        return x0, y0, 0.0, False, False

    # central finite-difference Hessian of the analytic gradient
    hess = None
    probes = []
    for dx, dy in ((h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)):
        okp, _fp, pgx, pgy = kernel(recs, x0 + dx, y0 + dy)
        if not okp:
            probes = None
            break
        probes.append((pgx, pgy))
    if probes is not None:
        (xpg, xpgy), (xmg, xmgy), (ypg, ypgy), (ymg, ymgy) = probes
        hxx = (xpg - xmg) / (2.0 * h)
        hyy = (ypgy - ymgy) / (2.0 * h)
        hxy = 0.5 * ((xpgy - xmgy) / (2.0 * h) + (ypg - ymg) / (2.0 * h))
        hdet = hxx * hyy - hxy * hxy
        if hxx > 0.0 and hdet > 0.0:
            hess = (hxx, hxy, hyy, hdet)

    if hess is not None:
        hxx, hxy, hyy, hdet = hess
        dx = -(hyy * gx - hxy * gy) / hdet
        dy = -(hxx * gy - hxy * gx) / hdet
        slope = gx * dx + gy * dy
        if slope < 0.0:
            x1 = x0 + dx
            y1 = y0 + dy
            feasible = (not barrier) or (
                records_dets_positive(extra, x1, y1) if extra else True
            )
            if feasible:
                ok1, f1, _g, _g2 = kernel(recs, x1, y1)
                if ok1 and f1 <= f0 + cfg.armijo_c * slope and f1 < f0:
                    return x1, y1, f0 - f1, True, False

    # steepest descent with backtracking
    t = 1.0
    for _ in range(cfg.max_backtracks + 1):
        x1 = x0 - t * gx
        y1 = y0 - t * gy
        feasible = (not barrier) or (
            records_dets_positive(extra, x1, y1) if extra else True
        )
        if feasible:
            ok1, f1, _g, _g2 = kernel(recs, x1, y1)
            if ok1 and f1 <= f0 - cfg.armijo_c * t * gnorm2 and f1 < f0:
                return x1, y1, f0 - f1, True, False
        t *= cfg.backtrack_factor
    return x0, y0, 0.0, False, True


def optimize_node(
    grid: StructuredGrid,
    k,
    kind: FunctionalKind,
    cfg: OptimizerConfig | None = None,
    bbox_diag: float | None = None,
) -> tuple[Point2, float]:
    """Propose a new position for interior node k and the achieved decrease
    of its local objective.  The grid is not modified.

    ``bbox_diag`` overrides the finite-difference length scale; sweeps pass
    the sweep-start value so a sweep is exactly a sequence of these calls.
    """
    cfg = cfg or OptimizerConfig()
    i, j = k
    if not grid.is_interior(i, j):
        raise ValueError(f"optimize_node requires an interior node, got (i={i}, j={j})")
    xs, ys = grid_to_lists(grid)
    s_flat = None
    if kind.takes_weight and kind.weight is not None:
        s_flat = _flatten_weights(corner_weight_cache(grid.xy, kind.weight))
    recs, extra = _stencil_records(xs, ys, grid.ni, grid.nj, i, j, cfg.stencil, s_flat)
    diag = bbox_diag if bbox_diag is not None else _bbox_diag(grid.xy)
    idx = j * grid.ni + i
    try:
        x1, y1, dec, _moved, _failed = _descend(
            make_kernel(kind), recs, extra, kind.is_barrier,
            xs[idx], ys[idx], FD_STEP_SCALE * diag, cfg,
        )
    except FoldedGridError:
        raise FoldedGridError(
            f"{kind.label()} is undefined on a stencil with folded corners", node=(i, j)
        ) from None
    return Point2(x1, y1), dec


def _make_untangle_kernel(beta):
    def kernel(recs, px, py):
        f = gx = gy = 0.0
        for c1x, c1y, m1, c2x, c2y, m2, _s in recs:
            ax = c1x + m1 * px
            ay = c1y + m1 * py
            bx = c2x + m2 * px
            by = c2y + m2 * py
            det = ax * by - ay * bx
            v = beta - det
            if v > 0.0:
                f += v * v
                c = -2.0 * v
                gx += c * (m1 * by - m2 * ay)
                gy += c * (m2 * ax - m1 * bx)
        return True, f, gx, gy

    return kernel


def untangle_beta(grid: StructuredGrid, cfg: OptimizerConfig) -> float:
    """Margin beta for the fold penalty: a small fraction of the mean
    absolute corner determinant."""
    dets = interior_corner_dets(grid.xy)
    return cfg.untangle_margin_factor * float(np.abs(dets).mean())


def untangle_node(
    grid: StructuredGrid,
    k,
    cfg: OptimizerConfig | None = None,
    beta: float | None = None,
    bbox_diag: float | None = None,
) -> Point2:
    """Propose a position for node k that does not increase its fold penalty."""
    cfg = cfg or OptimizerConfig()
    i, j = k
    if not grid.is_interior(i, j):
        raise ValueError(f"untangle_node requires an interior node, got (i={i}, j={j})")
    if beta is None:
        beta = untangle_beta(grid, cfg)
    xs, ys = grid_to_lists(grid)
    recs, _ = _stencil_records(xs, ys, grid.ni, grid.nj, i, j, "full", None)
    diag = bbox_diag if bbox_diag is not None else _bbox_diag(grid.xy)
    idx = j * grid.ni + i
    x1, y1, _dec, _moved, _failed = _descend(
        _make_untangle_kernel(beta), recs, [], False,
        xs[idx], ys[idx], FD_STEP_SCALE * diag, cfg,
    )
    return Point2(x1, y1)


def _write_back(grid: StructuredGrid, xs, ys):
    flat = np.column_stack([xs, ys]).reshape(grid.nj, grid.ni, 2)
    grid.xy[:] = flat.transpose(1, 0, 2)


def sweep(grid: StructuredGrid, kind: FunctionalKind, cfg: OptimizerConfig | None = None,
          sweep_index: int = 0) -> SweepStats:
    """One in-place Gauss-Seidel pass over all interior nodes.

    Adaptive weights and the finite-difference length scale are frozen at
    sweep start; updated node positions are visible to later nodes within
    the same sweep.  For barrier kinds the grid must be fold-free.
    """
    cfg = cfg or OptimizerConfig()
    ni, nj = grid.ni, grid.nj
    xy = grid.xy

    s_arr = None
    s_flat = None
    if kind.takes_weight and kind.weight is not None:
        s_arr = corner_weight_cache(xy, kind.weight)
        s_flat = _flatten_weights(s_arr)

    if kind.is_barrier and ni >= 3 and nj >= 3:
        dets = interior_corner_dets(xy)
        if np.any(dets <= 0.0):
            folded = np.argwhere((dets <= 0.0).any(axis=2).T)
            jj, ii = folded[0]
            raise FoldedGridError(
                f"sweep precondition violated: {kind.label()} needs a fold-free grid",
                node=(int(ii) + 1, int(jj) + 1),
            )

    value_before = global_value_from_arrays(xy, kind, s_arr=s_arr)
    diag = _bbox_diag(xy)
    h = FD_STEP_SCALE * diag
    kernel = make_kernel(kind)
    barrier = kind.is_barrier

    xs, ys = grid_to_lists(grid)
    max_disp2 = 0.0
    moved = 0
    failures = 0
    for j in range(1, nj - 1):
        for i in range(1, ni - 1):
            recs, extra = _stencil_records(xs, ys, ni, nj, i, j, cfg.stencil, s_flat)
            idx = j * ni + i
            x0 = xs[idx]
            y0 = ys[idx]
            x1, y1, _dec, did_move, failed = _descend(
                kernel, recs, extra, barrier, x0, y0, h, cfg
            )
            if did_move:
                xs[idx] = x1
                ys[idx] = y1
                moved += 1
                d2 = (x1 - x0) ** 2 + (y1 - y0) ** 2
                if d2 > max_disp2:
                    max_disp2 = d2
            if failed:
                failures += 1
    _write_back(grid, xs, ys)

    value_after = global_value_from_arrays(grid.xy, kind, s_arr=s_arr)
    return SweepStats(
        sweep_index=sweep_index,
        max_displacement=math.sqrt(max_disp2) / diag,
        global_value_before=value_before,
        global_value_after=value_after,
        nodes_moved=moved,
        backtrack_failures=failures,
    )


def _untangle_sweep(grid: StructuredGrid, cfg: OptimizerConfig) -> None:
    beta = untangle_beta(grid, cfg)
    kernel = _make_untangle_kernel(beta)
    diag = _bbox_diag(grid.xy)
    h = FD_STEP_SCALE * diag
    ni, nj = grid.ni, grid.nj
    xs, ys = grid_to_lists(grid)
    for j in range(1, nj - 1):
        for i in range(1, ni - 1):
            recs, _ = _stencil_records(xs, ys, ni, nj, i, j, "full", None)
            idx = j * ni + i
            x1, y1, _dec, did_move, _failed = _descend(
                kernel, recs, [], False, xs[idx], ys[idx], h, cfg
            )
            if did_move:
                xs[idx] = x1
                ys[idx] = y1
    _write_back(grid, xs, ys)


def fold_count(grid: StructuredGrid) -> int:
    if grid.ni < 3 or grid.nj < 3:
        return 0
    return int(np.count_nonzero(interior_corner_dets(grid.xy) <= 0.0))


def optimize(grid: StructuredGrid, kind: FunctionalKind,
             cfg: OptimizerConfig | None = None) -> OptimizeResult:
    """Full pipeline: untangle (barrier kinds only), then sweep to
    convergence.  The input grid is left untouched; boundary nodes of the
    result are bit-identical to the input's.
    """
    cfg = cfg or OptimizerConfig()
    g = grid.copy()

    untangle_sweeps = 0
    if kind.is_barrier:
        while fold_count(g) > 0:
            if untangle_sweeps >= cfg.max_sweeps:
                raise UntangleError(fold_count(g), untangle_sweeps)
            _untangle_sweep(g, cfg)
            untangle_sweeps += 1

    sweeps: list[SweepStats] = []
    converged = False
    for sweep_index in range(cfg.max_sweeps):
        stats = sweep(g, kind, cfg, sweep_index=sweep_index)
        sweeps.append(stats)
        if stats.max_displacement <= cfg.tol:
            converged = True
            break

    return OptimizeResult(
        grid=g,
        converged=converged,
        sweeps=sweeps,
        final_quality=quality_report(g, kind),
        untangle_sweeps=untangle_sweeps,
    )
