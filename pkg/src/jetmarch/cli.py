"""Command-line experiment harness.

Subcommands: solve (one march + field dump), converge (order study),
counterexample (4- vs 8-point stencil study), pointwise (per-node orders),
amplitude (spreading/amplitude fields).  Worker threads for independent
runs are capped by the JMM_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments
from .marcher import SOLVER_NAMES
from .slowness import MODEL_NAMES, get_model


def _sizes(text):
    sizes = [int(t) for t in text.split(",") if t]
    if not sizes:
        raise argparse.ArgumentTypeError("empty size list")
    return sizes


def _vec2(text):
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'vx,vy'")
    return tuple(parts)


def _add_common(p, solver=True):
    p.add_argument("--problem", required=True, choices=MODEL_NAMES)
    if solver:
        p.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    p.add_argument("--stencil", default="eight", choices=("four", "eight"))
    p.add_argument("--init-radius", type=float, default=0.1,
                   help="half-width of the exact-data box around the source")
    p.add_argument("--init-kind", default="box", choices=("box", "disk", "slab"))
    p.add_argument("--s0", type=float, default=None,
                   help="override the model slowness scale")
    p.add_argument("--v", type=_vec2, default=None, metavar="VX,VY",
                   help="override the model coefficient vector")


def _model(args):
    if getattr(args, "s0", None) is None and getattr(args, "v", None) is None:
        return None
    return get_model(args.problem, s0=args.s0, v=args.v)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="jetmarch",
        description="High-order semi-Lagrangian eikonal solver experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one march and dump fields")
    _add_common(p)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--out", default=None, help="output directory for fields")
    p.add_argument("--format", default="csv", choices=("csv", "bin"))
    p.add_argument("--quantities", default="T,Tx,Ty,err_T")
    p.add_argument("--omega", type=float, default=100.0)

    p = sub.add_parser("converge", help="convergence study over a size ladder")
    _add_common(p)
    p.add_argument("--sizes", type=_sizes, required=True,
                   help="comma-separated strictly increasing sizes")
    p.add_argument("--out", default=None, help="output path prefix")
    p.add_argument("--format", default="csv", choices=("csv", "json", "both"))
    p.add_argument("--fit-skip", type=int, default=0,
                   help="drop this many of the smallest sizes from the fits")
    p.add_argument("--no-times", action="store_true",
                   help="write zero timings (byte-reproducible tables)")

    p = sub.add_parser("counterexample",
                       help="4- vs 8-point stencil study with slab data")
    p.add_argument("--solver", default="jmm3", choices=SOLVER_NAMES)
    p.add_argument("--sizes", type=_sizes, required=True)
    p.add_argument("--slab-depth", type=float, default=0.1)
    p.add_argument("--out", default=None)
    p.add_argument("--no-times", action="store_true")

    p = sub.add_parser("pointwise", help="pointwise convergence orders")
    _add_common(p)
    p.add_argument("--sizes", type=_sizes, required=True,
                   help="nested sizes; the first is the base grid")
    p.add_argument("--out", default=None)
    p.add_argument("--format", default="bin", choices=("csv", "bin"))

    p = sub.add_parser("amplitude",
                       help="march spreading and dump J, |A|, Re U")
    p.add_argument("--problem", required=True, choices=MODEL_NAMES)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--init-radius", type=float, default=0.1)
    p.add_argument("--init-kind", default="box", choices=("box", "disk"))
    p.add_argument("--omega", type=float, default=100.0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", default="bin", choices=("csv", "bin"))
    return ap


def _fit_window(skip):
    return slice(skip, None) if skip else None


def cmd_solve(args):
    ms = experiments.run_solve(args.problem, args.solver, args.size,
                               args.stencil, args.init_radius, args.init_kind,
                               model=_model(args))
    rep = experiments.error_norms(ms, time_s=ms.wall_time)
    print(f"{rep.problem} {rep.solver} M={rep.M} h={rep.h:.6g} "
          f"Erms_T={rep.erms_T:.3e} Emax_T={rep.emax_T:.3e} "
          f"Erms_gradT={rep.erms_grad:.3e} time={rep.time_s:.2f}s")
    if args.out:
        quantities = [q for q in args.quantities.split(",") if q]
        experiments.field_dump(ms, quantities, args.out, args.format,
                               args.omega)
    return 0


def cmd_converge(args):
    reports, fits = experiments.converge(
        args.problem, args.solver, args.sizes, args.stencil,
        args.init_radius, args.init_kind, model=_model(args),
        fit_window=_fit_window(args.fit_skip),
        out=args.out, fmt="both" if args.format == "both" else
        ("csv" if args.format == "csv" else "json"),
        with_times=not args.no_times)
    for r in reports:
        print(f"M={r.M:5d} h={r.h:.6g} Erms_T={r.erms_T:.3e} "
              f"Erms_gradT={r.erms_grad:.3e} time={r.time_s:.2f}s")
    if fits:
        for key in ("Erms_T", "Erms_gradT"):
            f = fits[key]
            print(f"fit {key}: order {f.order:.2f} (C={f.constant:.3g}, "
                  f"{f.npoints} pts)")
    else:
        print("single size: order fit skipped")
    return 0


def cmd_counterexample(args):
    results = experiments.counterexample_run(
        args.sizes, solver=args.solver, slab_depth=args.slab_depth,
        out=args.out, with_times=not args.no_times)
    orders = {}
    for stencil, (reports, fits) in results.items():
        orders[stencil] = fits["Erms_T"].order
        print(f"{stencil}-point stencil: Erms_T order {orders[stencil]:.2f}")
    gap = orders["eight"] - orders["four"]
    print(f"order gap (eight - four): {gap:.2f}")
    return 0


def cmd_pointwise(args):
    orders, base_grid, med = experiments.pointwise_convergence(
        args.problem, args.solver, args.sizes, args.stencil,
        args.init_radius, args.init_kind)
    print(f"median pointwise T order: {med:.2f} "
          f"(base grid {base_grid.M}x{base_grid.M})")
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        arr = np.asarray(orders, dtype="<f8")
        if args.format == "bin":
            arr.reshape(-1).tofile(f"{args.out}/orders.bin")
        else:
            np.savetxt(f"{args.out}/orders.csv", arr, delimiter=",")
        with open(f"{args.out}/meta.json", "w") as f:
            json.dump({"problem": args.problem, "solver": args.solver,
                       "sizes": args.sizes, "median_order": med,
                       "shape": [base_grid.M, base_grid.M],
                       "dtype": "<f8"}, f, indent=2, sort_keys=True)
            f.write("\n")
    return 0


def cmd_amplitude(args):
    from .amplitude import march_with_spreading
    from .experiments import grid_for_model
    from .marcher import InitRegion

    model = get_model(args.problem)
    grid = grid_for_model(model, args.size)
    ms = march_with_spreading(grid, model,
                              region=InitRegion(args.init_kind,
                                                args.init_radius))
    pts = grid.points()
    r = np.hypot(pts[..., 0], pts[..., 1])
    J = ms.J.reshape(grid.M, grid.M)
    ok = ~ms.region.mask(grid, model.source) & (r > 0)
    rel = np.abs(J[ok] - r[ok]) / r[ok] if args.problem == "constant" else None
    msg = f"amplitude march done: M={args.size}"
    if rel is not None:
        msg += f", max rel J error vs |x|: {rel.max():.3e}"
    print(msg)
    if args.out:
        experiments.field_dump(ms, ["T", "J", "absA", "reU"], args.out,
                               args.format, args.omega)
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "converge": cmd_converge,
    "counterexample": cmd_counterexample,
    "pointwise": cmd_pointwise,
    "amplitude": cmd_amplitude,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
