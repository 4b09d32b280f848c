"""Command-line interface: generate, optimize, adapt, quality, convert.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure
(untangling failure, barrier violation, weight evaluation error).  Errors
print one line to stderr with the stable prefix "error: ".
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import io as gridio
from .errors import FoldedGridError, QuadGridError, UntangleError
from .functionals import FunctionalKind, parse_functional
from .optimizer import OptimizerConfig, optimize
from .quality import quality_report
from .tfi import DOMAIN_NAMES, builtin_domain, tfi_init
from .weightexpr import EvalError, PRESET_NAMES, parse as parse_weight, preset as weight_preset


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_grid_source(p, require_out=True):
    p.add_argument("--in", dest="input", metavar="PATH", help="input grid (native format)")
    p.add_argument("--domain", choices=DOMAIN_NAMES, help="generate the initial grid from a built-in domain")
    p.add_argument("--nx", type=int, help="nodes along the bottom/top curves")
    p.add_argument("--ny", type=int, help="nodes along the left/right curves")
    if require_out:
        p.add_argument("--out", required=True, metavar="PATH", help="output grid path")
        p.add_argument("--format", choices=gridio.FORMATS, default="native", help="output format")


def _add_optimizer_flags(p):
    p.add_argument("--tol", type=float, default=1e-8, help="convergence: max node displacement / bbox diagonal")
    p.add_argument("--max-sweeps", type=int, default=500)
    p.add_argument("--stencil", choices=("own", "full"), default="full")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized tie-breaking (scheme has none; kept for config completeness)")
    p.add_argument("--stats-out", metavar="PATH", help="write per-sweep statistics as CSV")
    p.add_argument("--stats-plot", metavar="PATH", help="render the convergence history with matplotlib")
    p.add_argument("--plot", metavar="PATH", help="render the resulting grid with matplotlib")


def _add_weight_flags(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--weight-preset", choices=PRESET_NAMES, help="built-in adaptive weight")
    group.add_argument("--weight-expr", metavar="EXPR", help="adaptive weight formula s(x, y)")


def build_parser() -> _Parser:
    parser = _Parser(prog="quadgrid", description="Structured quad grid generation and variational optimization")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="build an initial grid by transfinite interpolation")
    p.add_argument("--domain", choices=DOMAIN_NAMES, required=True)
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--format", choices=gridio.FORMATS, default="native")
    p.add_argument("--plot", metavar="PATH")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("optimize", help="minimize a functional over the interior nodes")
    _add_grid_source(p)
    p.add_argument("--functional", default="winslow",
                   help="length, area, ortho, knupp, combined:kA,kL,kO, winslow, liao, modliao")
    _add_weight_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("adapt", help="adapt a grid with the weighted area functional")
    _add_grid_source(p)
    _add_weight_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=_cmd_adapt)

    p = sub.add_parser("quality", help="print a quality report for a grid")
    p.add_argument("path", nargs="?", metavar="PATH", help="grid file (native format)")
    p.add_argument("--in", dest="input", metavar="PATH")
    p.add_argument("--functional", default="winslow")
    _add_weight_flags(p)
    p.add_argument("--plot", metavar="PATH")
    p.set_defaults(func=_cmd_quality)

    p = sub.add_parser("convert", help="convert a native grid to native, vtk, or svg")
    p.add_argument("--in", dest="input", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--format", choices=gridio.FORMATS, required=True)
    p.add_argument("--plot", metavar="PATH")
    p.set_defaults(func=_cmd_convert)

    return parser


def _weight_from_args(args):
    if getattr(args, "weight_preset", None):
        return weight_preset(args.weight_preset)
    if getattr(args, "weight_expr", None):
        return parse_weight(args.weight_expr)
    return None


def _functional_from_args(args, default_tag=None):
    weight = _weight_from_args(args)
    text = getattr(args, "functional", None) or default_tag
    return parse_functional(text, weight=weight)


def _load_grid(args, parser_hint="--in or --domain/--nx/--ny"):
    if args.input and args.domain:
        raise QuadGridError("give either --in or --domain, not both")
    if args.input:
        return gridio.read_grid(args.input)
    if args.domain:
        if not args.nx or not args.ny:
            raise QuadGridError("--domain needs --nx and --ny")
        return tfi_init(builtin_domain(args.domain, args.nx, args.ny))
    raise QuadGridError(f"no input grid: give {parser_hint}")


def _write_grid(grid, path, fmt):
    if fmt == "native":
        gridio.write_grid(grid, path)
    elif fmt == "vtk":
        gridio.write_vtk(grid, path)
    else:
        gridio.write_svg(grid, path)


def _config_from_args(args) -> OptimizerConfig:
    return OptimizerConfig(
        tol=args.tol,
        max_sweeps=args.max_sweeps,
        stencil=args.stencil,
        rng_seed=args.seed,
    )


def _write_stats(path, sweeps):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([
            "sweep", "max_displacement", "global_value_before",
            "global_value_after", "nodes_moved", "backtrack_failures",
        ])
        for s in sweeps:
            writer.writerow([
                s.sweep_index, repr(s.max_displacement),
                repr(s.global_value_before), repr(s.global_value_after),
                s.nodes_moved, s.backtrack_failures,
            ])


def _cmd_generate(args) -> int:
    grid = tfi_init(builtin_domain(args.domain, args.nx, args.ny))
    _write_grid(grid, args.out, args.format)
    if args.plot:
        from .plotting import save_grid_figure

        save_grid_figure(grid, args.plot, title=f"{args.domain} {args.nx}x{args.ny} (TFI)")
    return 0


def _run_optimize(args, kind: FunctionalKind) -> int:
    grid = _load_grid(args)
    cfg = _config_from_args(args)
    result = optimize(grid, kind, cfg)
    _write_grid(result.grid, args.out, args.format)
    if args.stats_out:
        _write_stats(args.stats_out, result.sweeps)
    if args.stats_plot:
        from .plotting import save_convergence_figure

        save_convergence_figure(result.sweeps, args.stats_plot, title=kind.label())
    if args.plot:
        from .plotting import save_grid_figure

        save_grid_figure(result.grid, args.plot, title=f"optimized ({kind.label()})")
    print(f"converged = {result.converged}")
    print(f"sweeps = {len(result.sweeps)}")
    print(f"untangle_sweeps = {result.untangle_sweeps}")
    print(f"folded_corner_count = {result.final_quality.folded_corner_count}")
    return 0


def _cmd_optimize(args) -> int:
    return _run_optimize(args, _functional_from_args(args))


def _cmd_adapt(args) -> int:
    return _run_optimize(args, FunctionalKind.area(weight=_weight_from_args(args)))


def _cmd_quality(args) -> int:
    path = args.path or args.input
    if not path:
        raise QuadGridError("no input grid: give a path or --in")
    grid = gridio.read_grid(path)
    kind = _functional_from_args(args)
    report = quality_report(grid, kind)
    for line in report.lines():
        print(line)
    if args.plot:
        from .plotting import save_grid_figure

        save_grid_figure(grid, args.plot)
    return 0


def _cmd_convert(args) -> int:
    grid = gridio.read_grid(args.input)
    _write_grid(grid, args.out, args.format)
    if args.plot:
        from .plotting import save_grid_figure

        save_grid_figure(grid, args.plot)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UntangleError, FoldedGridError, EvalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QuadGridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
