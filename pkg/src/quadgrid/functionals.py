"""The discrete grid functionals and their node-local values and gradients.

Every functional is a sum over interior nodes of four per-corner terms built
from the corner metric coefficients g11, g12, g22 and the Jacobian
determinant:

    length      g11 + g22
    area        s * det**2            (s = adaptive weight, default 1)
    ortho       g12**2
    combined    kA*area + kL*length + kO*ortho   (kA + kL + kO = 1)
    winslow     (g11 + g22) / det     (barrier: blows up as det -> 0)
    liao        g11**2 + g22**2 + 2*g12**2
    modliao     ((g11 + g22)**2) / det**2        (barrier; equals winslow**2)

The node-local view gathers every term of the global sum that depends on one
node's position: its own four corners plus, in "full" stencil mode, the two
corners of each interior axis neighbor that reference it (up to twelve terms
total).  Moving a single node changes the global sum by exactly the change of
its full-stencil local value.

Gradients are analytic.  Adaptive weights are treated as constants of the
position (lagged): the term ds/dx is deliberately dropped, and optimizer
sweeps freeze all weight samples at sweep-start geometry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateFrameError, FoldedGridError, QuadGridError
from .grid import (
    CornerFrame,
    GridIndex,
    StructuredGrid,
    interior_corner_centroids,
    interior_corner_vectors,
)
from .weightexpr import WeightExpr, parse as parse_weight

TAGS = ("length", "area", "ortho", "combined", "winslow", "liao", "modliao")
STENCILS = ("own", "full")

KNUPP_COEFFS = (0.5, 0.0, 0.5)


@dataclass(frozen=True)
class FunctionalKind:
    """Tagged choice of functional with its parameters.

    ``weight`` (area, combined) is the adaptive function s(x, y); None means
    s = 1.  ``coeffs`` (combined only) are (kA, kL, kO), non-negative and
    summing to 1.
    """

    tag: str
    weight: Optional[WeightExpr] = None
    coeffs: Optional[tuple] = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise QuadGridError(f"unknown functional {self.tag!r} (expected one of {', '.join(TAGS)})")
        if self.tag == "combined":
            if self.coeffs is None or len(self.coeffs) != 3:
                raise QuadGridError("combined functional needs three coefficients (kA, kL, kO)")
            ka, kl, ko = (float(c) for c in self.coeffs)
            if min(ka, kl, ko) < 0.0:
                raise QuadGridError("combined coefficients must be non-negative")
            if abs(ka + kl + ko - 1.0) > 1e-12:
                raise QuadGridError(f"combined coefficients must sum to 1, got {ka + kl + ko!r}")
            object.__setattr__(self, "coeffs", (ka, kl, ko))
        elif self.coeffs is not None:
            raise QuadGridError(f"{self.tag} takes no coefficients")
        if self.weight is not None and self.tag not in ("area", "combined"):
            raise QuadGridError(f"{self.tag} takes no adaptive weight")

    # -- constructors ------------------------------------------------------

    @classmethod
    def length(cls):
        return cls("length")

    @classmethod
    def area(cls, weight: Optional[WeightExpr] = None):
        return cls("area", weight=weight)

    @classmethod
    def ortho(cls):
        return cls("ortho")

    @classmethod
    def combined(cls, ka, kl, ko, weight: Optional[WeightExpr] = None):
        return cls("combined", weight=weight, coeffs=(ka, kl, ko))

    @classmethod
    def knupp(cls, weight: Optional[WeightExpr] = None):
        return cls.combined(*KNUPP_COEFFS, weight=weight)

    @classmethod
    def winslow(cls):
        return cls("winslow")

    @classmethod
    def liao(cls):
        return cls("liao")

    @classmethod
    def modliao(cls):
        return cls("modliao")

    # -- properties --------------------------------------------------------

    @property
    def is_barrier(self) -> bool:
        return self.tag in ("winslow", "modliao")

    @property
    def takes_weight(self) -> bool:
        return self.tag in ("area", "combined")

    def label(self) -> str:
        if self.tag == "combined":
            if self.coeffs == KNUPP_COEFFS:
                return "knupp"
            return "combined:%r,%r,%r" % self.coeffs
        return self.tag

    def __str__(self) -> str:
        return self.label()


def parse_functional(text: str, weight: Optional[WeightExpr] = None) -> FunctionalKind:
    """Parse a CLI functional string: length, area, ortho, knupp,
    combined:kA,kL,kO, winslow, liao, modliao."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name == "knupp":
        return FunctionalKind.knupp(weight=weight)
    if name == "combined":
        parts = rest.split(",")
        if len(parts) != 3:
            raise QuadGridError("combined functional expects combined:kA,kL,kO")
        try:
            ka, kl, ko = (float(p) for p in parts)
        except ValueError:
            raise QuadGridError(f"invalid combined coefficients {rest!r}") from None
        return FunctionalKind.combined(ka, kl, ko, weight=weight)
    if rest:
        raise QuadGridError(f"functional {name!r} takes no parameters")
    if name in ("area", "combined"):
        return FunctionalKind(name, weight=weight)
    if name not in TAGS:
        choices = "length, area, ortho, knupp, combined:kA,kL,kO, winslow, liao, modliao"
        raise QuadGridError(f"unknown functional {text!r} (expected one of: {choices})")
    if weight is not None:
        raise QuadGridError(f"functional {name!r} takes no adaptive weight")
    return FunctionalKind(name)


# ---------------------------------------------------------------------------
# per-frame corner terms
# ---------------------------------------------------------------------------

def corner_length(frame: CornerFrame) -> float:
    return frame.g11 + frame.g22


def corner_area(frame: CornerFrame, s: float = 1.0) -> float:
    return s * frame.det ** 2


def corner_ortho(frame: CornerFrame) -> float:
    return frame.g12 ** 2


def corner_winslow(frame: CornerFrame) -> float:
    det = frame.det
    if det <= 0.0:
        raise DegenerateFrameError(f"winslow term undefined for determinant {det!r} <= 0")
    return (frame.g11 + frame.g22) / det


def corner_liao(frame: CornerFrame) -> float:
    return frame.g11 ** 2 + frame.g22 ** 2 + 2.0 * frame.g12 ** 2


def corner_modliao(frame: CornerFrame) -> float:
    gdet = frame.gdet
    if gdet <= 0.0:
        raise DegenerateFrameError(f"modified Liao term undefined for metric determinant {gdet!r} <= 0")
    return (frame.g11 + frame.g22) ** 2 / gdet


def corner_combined(frame: CornerFrame, ka: float, kl: float, ko: float, s: float = 1.0) -> float:
    return ka * corner_area(frame, s) + kl * corner_length(frame) + ko * corner_ortho(frame)


# ---------------------------------------------------------------------------
# adaptive weight sampling
# ---------------------------------------------------------------------------

def corner_weight_cache(xy: np.ndarray, expr: WeightExpr) -> np.ndarray:
    """Weight s sampled at every interior corner centroid, shape (ni-2, nj-2, 4).

    Optimizer sweeps compute this once per sweep and freeze it.
    """
    cen = interior_corner_centroids(xy)
    s = expr.eval(cen[..., 0], cen[..., 1])
    s = np.asarray(s, dtype=np.float64)
    if s.shape != cen.shape[:-1]:
        s = np.broadcast_to(s, cen.shape[:-1]).copy()
    if np.any(s <= 0.0):
        warnings.warn(
            "adaptive weight sampled non-positive values; the area functional "
            "may reward folded cells there",
            RuntimeWarning,
            stacklevel=2,
        )
    return s


def _flatten_weights(cache: np.ndarray) -> list:
    # flat index ((j-1)*(ni-2) + (i-1))*4 + quadrant
    return cache.transpose(1, 0, 2).reshape(-1).tolist()


# ---------------------------------------------------------------------------
# node-local stencil records
#
# Each record is (c1x, c1y, m1, c2x, c2y, m2, s) encoding one corner term
# whose covariant vectors are g1 = (c1x, c1y) + m1*p and g2 analogously,
# with p the position of the node being varied and m in {-1, 0, +1}.
# ---------------------------------------------------------------------------

def _stencil_records(xs, ys, ni, nj, i, j, stencil, s_flat):
    """Corner records for node (i, j).

    Returns (records, extra): ``records`` are the terms of the requested
    stencil; ``extra`` are the remaining position-dependent corners (non-empty
    only for the "own" stencil), needed for barrier feasibility checks.
    """
    idx = j * ni + i
    ex, ey = xs[idx + 1], ys[idx + 1]
    wx, wy = xs[idx - 1], ys[idx - 1]
    nx, ny = xs[idx + ni], ys[idx + ni]
    sx, sy = xs[idx - ni], ys[idx - ni]
    if s_flat is None:
        s0 = s1 = s2 = s3 = 1.0
    else:
        base = ((j - 1) * (ni - 2) + (i - 1)) * 4
        s0, s1, s2, s3 = s_flat[base], s_flat[base + 1], s_flat[base + 2], s_flat[base + 3]
    own = [
        (ex, ey, -1.0, nx, ny, -1.0, s0),    # NE
        (-wx, -wy, 1.0, nx, ny, -1.0, s1),   # NW
        (-wx, -wy, 1.0, -sx, -sy, 1.0, s2),  # SW
        (ex, ey, -1.0, -sx, -sy, 1.0, s3),   # SE
    ]

    nbr = []
    if i + 1 <= ni - 2:  # east neighbor interior; its NW and SW corners reference p
        rnx, rny = xs[idx + 1 + ni], ys[idx + 1 + ni]
        rsx, rsy = xs[idx + 1 - ni], ys[idx + 1 - ni]
        if s_flat is None:
            sa = sb = 1.0
        else:
            base = ((j - 1) * (ni - 2) + i) * 4
            sa, sb = s_flat[base + 1], s_flat[base + 2]
        nbr.append((ex, ey, -1.0, rnx - ex, rny - ey, 0.0, sa))
        nbr.append((ex, ey, -1.0, ex - rsx, ey - rsy, 0.0, sb))
    if i - 1 >= 1:  # west neighbor; NE and SE corners
        rnx, rny = xs[idx - 1 + ni], ys[idx - 1 + ni]
        rsx, rsy = xs[idx - 1 - ni], ys[idx - 1 - ni]
        if s_flat is None:
            sa = sb = 1.0
        else:
            base = ((j - 1) * (ni - 2) + (i - 2)) * 4
            sa, sb = s_flat[base], s_flat[base + 3]
        nbr.append((-wx, -wy, 1.0, rnx - wx, rny - wy, 0.0, sa))
        nbr.append((-wx, -wy, 1.0, wx - rsx, wy - rsy, 0.0, sb))
    if j + 1 <= nj - 2:  # north neighbor; SW and SE corners
        rwx, rwy = xs[idx + ni - 1], ys[idx + ni - 1]
        rex, rey = xs[idx + ni + 1], ys[idx + ni + 1]
        if s_flat is None:
            sa = sb = 1.0
        else:
            base = (j * (ni - 2) + (i - 1)) * 4
            sa, sb = s_flat[base + 2], s_flat[base + 3]
        nbr.append((nx - rwx, ny - rwy, 0.0, nx, ny, -1.0, sa))
        nbr.append((rex - nx, rey - ny, 0.0, nx, ny, -1.0, sb))
    if j - 1 >= 1:  # south neighbor; NE and NW corners
        rwx, rwy = xs[idx - ni - 1], ys[idx - ni - 1]
        rex, rey = xs[idx - ni + 1], ys[idx - ni + 1]
        if s_flat is None:
            sa = sb = 1.0
        else:
            base = ((j - 2) * (ni - 2) + (i - 1)) * 4
            sa, sb = s_flat[base], s_flat[base + 1]
        nbr.append((rex - sx, rey - sy, 0.0, -sx, -sy, 1.0, sa))
        nbr.append((sx - rwx, sy - rwy, 0.0, -sx, -sy, 1.0, sb))

    if stencil == "own":
        return own, nbr
    return own + nbr, []


def records_dets_positive(records, px, py) -> bool:
    """True if every record's corner determinant is strictly positive at p."""
    for c1x, c1y, m1, c2x, c2y, m2, _s in records:
        ax = c1x + m1 * px
        ay = c1y + m1 * py
        bx = c2x + m2 * px
        by = c2y + m2 * py
        if ax * by - ay * bx <= 0.0:
            return False
    return True


# ---------------------------------------------------------------------------
# kernels: evaluate value and analytic gradient of the summed corner terms
# as a function of the node position.  Return (feasible, f, gx, gy) where
# feasible is False only for barrier kinds hitting det <= 0.
# ---------------------------------------------------------------------------

def _kernel_length(recs, px, py):
    f = gx = gy = 0.0
    for c1x, c1y, m1, c2x, c2y, m2, _s in recs:
        ax = c1x + m1 * px
        ay = c1y + m1 * py
        bx = c2x + m2 * px
        by = c2y + m2 * py
        f += ax * ax + ay * ay + bx * bx + by * by
        gx += 2.0 * (m1 * ax + m2 * bx)
        gy += 2.0 * (m1 * ay + m2 * by)
    return True, f, gx, gy


def _kernel_area(recs, px, py):
    f = gx = gy = 0.0
    for c1x, c1y, m1, c2x, c2y, m2, s in recs:
        ax = c1x + m1 * px
        ay = c1y + m1 * py
        bx = c2x + m2 * px
        by = c2y + m2 * py
        det = ax * by - ay * bx
        f += s * det * det
        c = 2.0 * s * det
        gx += c * (m1 * by - m2 * ay)
        gy += c * (m2 * ax - m1 * bx)
    return True, f, gx, gy


def _kernel_ortho(recs, px, py):
    f = gx = gy = 0.0
    for c1x, c1y, m1, c2x, c2y, m2, _s in recs:
        ax = c1x + m1 * px
        ay = c1y + m1 * py
        bx = c2x + m2 * px
        by = c2y + m2 * py
        dot = ax * bx + ay * by
        f += dot * dot
        gx += 2.0 * dot * (m1 * bx + m2 * ax)
        gy += 2.0 * dot * (m1 * by + m2 * ay)
    return True, f, gx, gy


def _kernel_winslow(recs, px, py):
    f = gx = gy = 0.0
    for c1x, c1y, m1, c2x, c2y, m2, _s in recs:
        ax = c1x + m1 * px
        ay = c1y + m1 * py
        bx = c2x + m2 * px
        by = c2y + m2 * py
        det = ax * by - ay * bx
        if det <= 0.0:
            return False, float("inf"), 0.0, 0.0
        tr = ax * ax + ay * ay + bx * bx + by * by
        inv = 1.0 / det
        w = tr * inv
        f += w
        c = w * inv
        gx += m1 * (2.0 * ax * inv - c * by) + m2 * (2.0 * bx * inv + c * ay)
        gy += m1 * (2.0 * ay * inv + c * bx) + m2 * (2.0 * by * inv - c * ax)
    return True, f, gx, gy


def _kernel_liao(recs, px, py):
    f = gx = gy = 0.0
    for c1x, c1y, m1, c2x, c2y, m2, _s in recs:
        ax = c1x + m1 * px
        ay = c1y + m1 * py
        bx = c2x + m2 * px
        by = c2y + m2 * py
        g11 = ax * ax + ay * ay
        g22 = bx * bx + by * by
        g12 = ax * bx + ay * by
        f += g11 * g11 + g22 * g22 + 2.0 * g12 * g12
        gx += 4.0 * (g11 * ax * m1 + g22 * bx * m2 + g12 * (m1 * bx + m2 * ax))
        gy += 4.0 * (g11 * ay * m1 + g22 * by * m2 + g12 * (m1 * by + m2 * ay))
    return True, f, gx, gy


def _kernel_modliao(recs, px, py):
    f = gx = gy = 0.0
    for c1x, c1y, m1, c2x, c2y, m2, _s in recs:
        ax = c1x + m1 * px
        ay = c1y + m1 * py
        bx = c2x + m2 * px
        by = c2y + m2 * py
        det = ax * by - ay * bx
        if det <= 0.0:
            return False, float("inf"), 0.0, 0.0
        tr = ax * ax + ay * ay + bx * bx + by * by
        inv = 1.0 / det
        w = tr * inv
        f += w * w
        c = w * inv
        scale = 2.0 * w
        gx += scale * (m1 * (2.0 * ax * inv - c * by) + m2 * (2.0 * bx * inv + c * ay))
        gy += scale * (m1 * (2.0 * ay * inv + c * bx) + m2 * (2.0 * by * inv - c * ax))
    return True, f, gx, gy


def _make_combined_kernel(ka, kl, ko):
    def kernel(recs, px, py):
        f = gx = gy = 0.0
        for c1x, c1y, m1, c2x, c2y, m2, s in recs:
            ax = c1x + m1 * px
            ay = c1y + m1 * py
            bx = c2x + m2 * px
            by = c2y + m2 * py
            det = ax * by - ay * bx
            tr = ax * ax + ay * ay + bx * bx + by * by
            dot = ax * bx + ay * by
            f += ka * s * det * det + kl * tr + ko * dot * dot
            ca = 2.0 * ka * s * det
            co = 2.0 * ko * dot
            gx += (ca * (m1 * by - m2 * ay)
                   + 2.0 * kl * (m1 * ax + m2 * bx)
                   + co * (m1 * bx + m2 * ax))
            gy += (ca * (m2 * ax - m1 * bx)
                   + 2.0 * kl * (m1 * ay + m2 * by)
                   + co * (m1 * by + m2 * ay))
        return True, f, gx, gy

    return kernel


def make_kernel(kind: FunctionalKind):
    """Value-and-gradient kernel for the given functional."""
    if kind.tag == "length":
        return _kernel_length
    if kind.tag == "area":
        return _kernel_area
    if kind.tag == "ortho":
        return _kernel_ortho
    if kind.tag == "winslow":
        return _kernel_winslow
    if kind.tag == "liao":
        return _kernel_liao
    if kind.tag == "modliao":
        return _kernel_modliao
    return _make_combined_kernel(*kind.coeffs)


# ---------------------------------------------------------------------------
# public node-local and global evaluation
# ---------------------------------------------------------------------------

def grid_to_lists(grid: StructuredGrid) -> tuple[list, list]:
    """Flat coordinate lists (j outer, i inner), the optimizer's working form."""
    flat = grid.to_flat()
    return flat[:, 0].tolist(), flat[:, 1].tolist()


def weight_lists(xy: np.ndarray, kind: FunctionalKind):
    """Flattened frozen corner weights for the stencil builder (or None)."""
    if not kind.takes_weight or kind.weight is None:
        return None
    return _flatten_weights(corner_weight_cache(xy, kind.weight))


def _check_stencil(stencil: str):
    if stencil not in STENCILS:
        raise QuadGridError(f"unknown stencil {stencil!r} (expected 'own' or 'full')")


def _local_eval(grid: StructuredGrid, k, kind: FunctionalKind, stencil: str, weights=None):
    i, j = k
    if not grid.is_interior(i, j):
        raise ValueError(f"local evaluation requires an interior node, got (i={i}, j={j})")
    _check_stencil(stencil)
    xs, ys = grid_to_lists(grid)
    if weights is not None:
        s_flat = _flatten_weights(np.asarray(weights, dtype=np.float64))
    else:
        s_flat = weight_lists(grid.xy, kind)
    recs, _extra = _stencil_records(xs, ys, grid.ni, grid.nj, i, j, stencil, s_flat)
    idx = j * grid.ni + i
    ok, f, gx, gy = make_kernel(kind)(recs, xs[idx], ys[idx])
    if not ok:
        raise FoldedGridError(
            f"{kind.label()} is undefined on a stencil with folded corners", node=(i, j)
        )
    return f, gx, gy


def local_value(grid: StructuredGrid, k, kind: FunctionalKind, stencil: str = "full",
                weights=None) -> float:
    """Sum of the stencil's corner terms as a function of node k.

    "own" sums the node's 4 corners; "full" adds the 8 neighbor corners that
    reference the node, i.e. every global-sum term depending on it.
    ``weights`` optionally supplies frozen per-corner adaptive weights of
    shape (ni-2, nj-2, 4), as used during optimizer sweeps; otherwise the
    weight is sampled at the current geometry.
    """
    f, _gx, _gy = _local_eval(grid, k, kind, stencil, weights)
    return f


def local_gradient(grid: StructuredGrid, k, kind: FunctionalKind, stencil: str = "full",
                   weights=None) -> np.ndarray:
    """Analytic gradient of local_value with respect to the position of node k.

    Adaptive weights are held constant (lagged); there is no ds/dx term, so
    for non-constant weights this is the gradient of local_value with the
    same frozen ``weights``.
    """
    _f, gx, gy = _local_eval(grid, k, kind, stencil, weights)
    return np.array([gx, gy])


def global_value_from_arrays(xy: np.ndarray, kind: FunctionalKind, s_arr=None) -> float:
    """Global functional value from a coordinate array.

    ``s_arr`` overrides adaptive weight sampling with frozen per-corner
    values (the optimizer's lagged weights); by default weights are sampled
    at the current geometry.
    """
    if xy.shape[0] < 3 or xy.shape[1] < 3:
        return 0.0
    g1, g2 = interior_corner_vectors(xy)
    g11 = np.einsum("...k,...k->...", g1, g1)
    g22 = np.einsum("...k,...k->...", g2, g2)
    det = g1[..., 0] * g2[..., 1] - g1[..., 1] * g2[..., 0]

    if kind.is_barrier and np.any(det <= 0.0):
        folded = np.argwhere((det <= 0.0).any(axis=2).T)  # transposed: j-outer order
        jj, ii = folded[0]
        raise FoldedGridError(
            f"{kind.label()} is undefined on a folded grid", node=(int(ii) + 1, int(jj) + 1)
        )

    tag = kind.tag
    if tag == "length":
        terms = g11 + g22
    elif tag == "winslow":
        terms = (g11 + g22) / det
    elif tag == "modliao":
        w = (g11 + g22) / det
        terms = w * w
    elif tag == "liao":
        g12 = np.einsum("...k,...k->...", g1, g2)
        terms = g11 ** 2 + g22 ** 2 + 2.0 * g12 ** 2
    elif tag == "ortho":
        g12 = np.einsum("...k,...k->...", g1, g2)
        terms = g12 ** 2
    else:  # area or combined
        if s_arr is None and kind.weight is not None:
            s_arr = corner_weight_cache(xy, kind.weight)
        s = 1.0 if s_arr is None else s_arr
        if tag == "area":
            terms = s * det ** 2
        else:
            ka, kl, ko = kind.coeffs
            g12 = np.einsum("...k,...k->...", g1, g2)
            terms = ka * (s * det ** 2) + kl * (g11 + g22) + ko * g12 ** 2
    return float(terms.sum())


def global_value(grid: StructuredGrid, kind: FunctionalKind) -> float:
    """Sum over all interior nodes of their four own corner terms."""
    return global_value_from_arrays(grid.xy, kind)
