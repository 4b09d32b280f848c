"""quadgrid: structured quadrilateral grid generation and variational
optimization.

Grids start from linear transfinite interpolation of four boundary curves
and are improved by node-at-a-time Gauss-Seidel minimization of discrete
grid functionals (length, adaptive area, orthogonality, Knupp combination,
Winslow, Liao, modified Liao), with an untangling pre-pass for the barrier
functionals and quality auditing throughout.
"""

from .errors import (
    DegenerateFrameError,
    DomainSpecError,
    FoldedGridError,
    GridFormatError,
    QuadGridError,
    UntangleError,
)
from .functionals import (
    FunctionalKind,
    KNUPP_COEFFS,
    corner_area,
    corner_combined,
    corner_length,
    corner_liao,
    corner_modliao,
    corner_ortho,
    corner_winslow,
    global_value,
    local_gradient,
    local_value,
    parse_functional,
)
from .grid import (
    CornerFrame,
    GridIndex,
    Point2,
    Quadrant,
    StructuredGrid,
    condition_number,
    corner_frames,
    folded_corner_count,
)
from .io import read_grid, write_grid, write_svg, write_vtk
from .optimizer import (
    OptimizeResult,
    OptimizerConfig,
    SweepStats,
    optimize,
    optimize_node,
    sweep,
    untangle_node,
)
from .quality import QualityReport, cell_areas, quality_report
from .tfi import BoundaryCurve, DOMAIN_NAMES, DomainSpec, builtin_domain, tfi_init
from .weightexpr import EvalError, ParseError, WeightExpr
from . import weightexpr

__version__ = "0.1.0"

__all__ = [
    "BoundaryCurve",
    "CornerFrame",
    "DOMAIN_NAMES",
    "DegenerateFrameError",
    "DomainSpec",
    "DomainSpecError",
    "EvalError",
    "FoldedGridError",
    "FunctionalKind",
    "GridFormatError",
    "GridIndex",
    "KNUPP_COEFFS",
    "OptimizeResult",
    "OptimizerConfig",
    "ParseError",
    "Point2",
    "QuadGridError",
    "Quadrant",
    "QualityReport",
    "StructuredGrid",
    "SweepStats",
    "UntangleError",
    "WeightExpr",
    "cell_areas",
    "condition_number",
    "corner_area",
    "corner_combined",
    "corner_frames",
    "corner_length",
    "corner_liao",
    "corner_modliao",
    "corner_ortho",
    "corner_winslow",
    "folded_corner_count",
    "global_value",
    "local_gradient",
    "local_value",
    "optimize",
    "optimize_node",
    "parse_functional",
    "quality_report",
    "read_grid",
    "sweep",
    "tfi_init",
    "builtin_domain",
    "untangle_node",
    "weightexpr",
    "write_grid",
    "write_svg",
    "write_vtk",
]
