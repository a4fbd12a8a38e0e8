"""Experiment harness: error norms, convergence-order fits, studies, dumps.

Errors are always computed against the model's closed-form solution over
the nodes outside the initialization region (and never at the source);
exact-initialized nodes would artificially deflate the norms.
"""

from __future__ import annotations

import json
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cellmarch
from .grid import Grid2
from .marcher import InitRegion, VALID, initialize, march
from .slowness import get_model


def grid_for_model(model, M):
    xmin, ymin, extent = model.domain
    return Grid2.from_domain(xmin, ymin, extent, M)


def default_sizes(kmin=6, kmax=9):
    """The 2**k + 1 size ladder (nested grids)."""
    return [2**k + 1 for k in range(kmin, kmax + 1)]


@dataclass
class ErrorReport:
    problem: str
    solver: str
    M: int
    h: float
    emax_T: float
    erms_T: float
    emax_grad: float
    erms_grad: float
    time_s: float = 0.0
    components: dict = field(default_factory=dict)

    def row(self, with_jet2=False, with_times=True):
        vals = [self.problem, self.solver, self.M, repr(self.h),
                repr(self.emax_T), repr(self.erms_T),
                repr(self.emax_grad), repr(self.erms_grad),
                repr(self.time_s if with_times else 0.0)]
        if with_jet2:
            for key in JET2_COLUMNS:
                vals.append(repr(self.components.get(key, float("nan"))))
        return vals


CSV_HEADER = ["problem", "solver", "M", "h", "Emax_T", "Erms_T",
              "Emax_gradT", "Erms_gradT", "time_s"]
JET2_COLUMNS = ["Erms_Tx", "Erms_Ty", "Erms_Txx", "Erms_Txy", "Erms_Tyy"]


@dataclass(frozen=True)
class FitResult:
    order: float
    constant: float
    residual: float
    npoints: int


def error_mask(ms):
    """Boolean (M, M) mask of nodes that count toward error norms."""
    grid = ms.grid
    mask = ~ms.region.mask(grid, ms.model.source)
    pts = grid.points()
    src = (pts[..., 0] == ms.model.source[0]) & (pts[..., 1] == ms.model.source[1])
    return mask & ~src


def _masked_norms(err, mask):
    e = np.abs(err[mask])
    return float(e.max()), float(np.sqrt(np.mean(e * e)))


def error_norms(ms, include_jet2=None, time_s=0.0):
    """Error report of a completed march against the exact solution."""
    grid = ms.grid
    model = ms.model
    mask = error_mask(ms)
    pts = grid.points()
    T, gx, gy = ms.jets()
    tau = model.tau(pts)
    gt = model.grad_tau(pts[mask])
    emax_T, erms_T = _masked_norms(T - tau, mask)
    dgx = gx[mask] - gt[:, 0]
    dgy = gy[mask] - gt[:, 1]
    gerr = np.hypot(dgx, dgy)
    comps = {
        "Erms_Tx": float(np.sqrt(np.mean(dgx**2))),
        "Erms_Ty": float(np.sqrt(np.mean(dgy**2))),
        "Emax_Tx": float(np.abs(dgx).max()),
        "Emax_Ty": float(np.abs(dgy).max()),
    }
    if include_jet2 is None:
        include_jet2 = ms.solver == "jmm4" and ms.has_cells
    if include_jet2:
        txx, txy, tyy = cellmarch.nodal_second_partials(ms)
        ht = model.hess_tau(pts[mask])
        for name, num, exa in (("Txx", txx, ht[:, 0, 0]),
                               ("Txy", txy, ht[:, 0, 1]),
                               ("Tyy", tyy, ht[:, 1, 1])):
            d = num[mask] - exa
            d = d[~np.isnan(d)]
            comps[f"Erms_{name}"] = float(np.sqrt(np.mean(d * d)))
            comps[f"Emax_{name}"] = float(np.abs(d).max())
    return ErrorReport(model.name, ms.solver, grid.M, grid.h,
                       emax_T, erms_T, float(gerr.max()),
                       float(np.sqrt(np.mean(gerr**2))), time_s, comps)


def fit_order(points, window=None):
    """Least-squares order fit E ~ C h^p on log-log.

    ``points`` is a sequence of (h, E); ``window`` optionally slices it
    (after sorting by decreasing h).  Non-positive errors are dropped with
    a warning; fewer than 2 surviving points is an error.
    """
    pts = sorted(points, key=lambda t: -t[0])
    if window is not None:
        pts = pts[window]
    kept = [(h, e) for h, e in pts if e > 0]
    if len(kept) < len(pts):
        warnings.warn("dropping non-positive errors from order fit")
    if len(kept) < 2:
        raise ValueError("need at least 2 positive errors to fit an order")
    lh = np.log([h for h, _ in kept])
    le = np.log([e for _, e in kept])
    p, logc = np.polyfit(lh, le, 1)
    resid = float(np.sqrt(np.mean((np.polyval([p, logc], lh) - le) ** 2)))
    return FitResult(float(p), float(np.exp(logc)), resid, len(kept))


def run_solve(problem, solver, M, stencil="eight", init_radius=0.1,
              init_kind="box", model=None, track_spreading=False):
    """March one (problem, solver, size) cell; returns the finished state."""
    if model is None:
        model = get_model(problem)
    grid = grid_for_model(model, M)
    region = InitRegion(init_kind, init_radius)
    t0 = time.perf_counter()
    if track_spreading:
        from .amplitude import march_with_spreading

        ms = march_with_spreading(grid, model, region=region, stencil=stencil)
    else:
        ms = initialize(grid, model, solver, stencil=stencil, region=region)
        march(ms)
    ms.wall_time = time.perf_counter() - t0
    if (ms.state != VALID).any():
        raise RuntimeError("march finished with unreached nodes")
    return ms


def _workers():
    try:
        return max(1, int(os.environ.get("JMM_THREADS", "1")))
    except ValueError:
        return 1


def converge(problem, solver, sizes, stencil="eight", init_radius=0.1,
             init_kind="box", model=None, fit_window=None, out=None,
             fmt="csv", with_times=True):
    """Convergence study over a size ladder.

    Runs one march per size (independent states, optionally in JMM_THREADS
    worker threads), collects error reports, fits RMS/max orders for T and
    grad T, and optionally writes CSV and JSON tables.

    Returns (reports, fits) with fits a dict keyed by error-column name.
    """
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")

    def cell(M):
        ms = run_solve(problem, solver, M, stencil, init_radius, init_kind,
                       model=model)
        return error_norms(ms, time_s=ms.wall_time)

    nw = _workers()
    if nw > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            reports = list(pool.map(cell, sizes))
    else:
        reports = [cell(M) for M in sizes]
    reports.sort(key=lambda r: r.M)

    fits = {}
    if len(sizes) >= 2:
        hs = [r.h for r in reports]
        for key, get in [("Erms_T", lambda r: r.erms_T),
                         ("Emax_T", lambda r: r.emax_T),
                         ("Erms_gradT", lambda r: r.erms_grad),
                         ("Emax_gradT", lambda r: r.emax_grad)]:
            fits[key] = fit_order(list(zip(hs, [get(r) for r in reports])),
                                  window=fit_window)
        if reports[-1].components.get("Erms_Txx") is not None \
                and "Erms_Txx" in reports[-1].components:
            for key in JET2_COLUMNS:
                vals = [r.components.get(key) for r in reports]
                if all(v is not None for v in vals):
                    fits[key] = fit_order(list(zip(hs, vals)), window=fit_window)

    if out is not None:
        write_tables(reports, fits, out, fmt=fmt, with_times=with_times)
    return reports, fits


def write_tables(reports, fits, out, fmt="csv", with_times=True):
    """Write a convergence table as CSV and/or JSON next to ``out``.

    ``out`` is a path prefix; '<out>.csv' and '<out>.json' are produced
    (JSON always carries the fits).
    """
    out = str(out)
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with_jet2 = any("Erms_Txx" in r.components for r in reports)
    if fmt in ("csv", "both"):
        header = CSV_HEADER + (JET2_COLUMNS if with_jet2 else [])
        lines = [",".join(header)]
        for r in reports:
            lines.append(",".join(str(v) for v in r.row(with_jet2, with_times)))
        with open(out + ".csv", "w") as f:
            f.write("\n".join(lines) + "\n")
    payload = {
        "reports": [
            {"problem": r.problem, "solver": r.solver, "M": r.M, "h": r.h,
             "Emax_T": r.emax_T, "Erms_T": r.erms_T,
             "Emax_gradT": r.emax_grad, "Erms_gradT": r.erms_grad,
             "time_s": r.time_s if with_times else 0.0,
             **r.components}
            for r in reports
        ],
        "fits": {k: {"order": f.order, "constant": f.constant,
                     "residual": f.residual, "npoints": f.npoints}
                 for k, f in fits.items()},
    }
    with open(out + ".json", "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def counterexample_run(sizes, solver="jmm3", slab_depth=0.1, out=None,
                       with_times=True):
    """Stencil study on the quadrant problem with slab initialization.

    Runs the same solver with the 4-point and 8-point stencils; the
    8-point fit is expected around third order while the 4-point stencil
    caps near second order.
    """
    results = {}
    for stencil in ("eight", "four"):
        reports, fits = converge(
            "counterexample", solver, sizes, stencil=stencil,
            init_radius=slab_depth, init_kind="slab",
            out=None if out is None else f"{out}_{stencil}",
            with_times=with_times)
        results[stencil] = (reports, fits)
    return results


def pointwise_convergence(problem, solver, sizes, stencil="eight",
                          init_radius=0.1, init_kind="box"):
    """Per-node convergence order by decimating nested grids.

    Every size is decimated to the coarsest grid of the ladder and a
    least-squares order is fit pointwise from the |T - tau| samples.
    Nodes with a zero error at any size get NaN (undefined order).
    Returns (orders, base_grid, median_order).
    """
    sizes = list(sizes)
    base = sizes[0]
    for M in sizes:
        if (M - 1) % (base - 1) != 0:
            raise ValueError(f"size {M} does not nest over the base grid {base}")
    model = get_model(problem)
    errs = []
    hs = []
    mask = None
    for M in sizes:
        ms = run_solve(problem, solver, M, stencil, init_radius, init_kind,
                       model=model)
        stride = (M - 1) // (base - 1)
        T = ms.T.reshape(M, M)[::stride, ::stride]
        pts = ms.grid.points()[::stride, ::stride]
        tau = model.tau(pts)
        errs.append(np.abs(T - tau))
        hs.append(ms.grid.h)
        if M == base:
            mask = error_mask(ms)
    orders = pointwise_orders(np.stack(errs), hs)
    ok = np.isfinite(orders)
    med = float(np.nanmedian(orders[mask & ok]))
    return orders, Grid2.from_domain(*model.domain, base), med


def pointwise_orders(errors, hs):
    """Per-node least-squares orders from stacked error fields.

    ``errors`` has shape (k, ...) over k grid spacings ``hs``; nodes with a
    zero error at any size get NaN (undefined order).
    """
    E = np.asarray(errors, dtype=float)
    lh = np.log(np.asarray(hs, dtype=float))
    ok = (E > 0).all(axis=0)
    lE = np.where(E > 0, np.log(np.maximum(E, 1e-300)), 0.0)
    lhc = lh - lh.mean()
    denom = float((lhc**2).sum())
    orders = (lhc[:, None, None] * (lE - lE.mean(axis=0))).sum(axis=0) / denom
    return np.where(ok, orders, np.nan)


FIELD_QUANTITIES = ("T", "Tx", "Ty", "err_T", "Txx", "Txy", "Tyy",
                    "J", "absA", "reU")


def field_values(ms, quantity, omega=100.0):
    M = ms.grid.M
    if quantity == "T":
        return ms.T.reshape(M, M)
    if quantity == "Tx":
        return ms.gx.reshape(M, M)
    if quantity == "Ty":
        return ms.gy.reshape(M, M)
    if quantity == "err_T":
        return ms.T.reshape(M, M) - ms.model.tau(ms.grid.points())
    if quantity in ("Txx", "Txy", "Tyy"):
        txx, txy, tyy = cellmarch.nodal_second_partials(ms)
        return {"Txx": txx, "Txy": txy, "Tyy": tyy}[quantity]
    if quantity in ("J", "absA", "reU"):
        from .amplitude import amplitude_fields

        J, A, U = amplitude_fields(ms, omega)
        return {"J": J, "absA": np.abs(A), "reU": U.real}[quantity]
    raise ValueError(f"unknown field quantity {quantity!r}")


def field_dump(ms, quantities, path, fmt="bin", omega=100.0):
    """Dump nodal fields with a JSON sidecar describing the run.

    'bin' writes one row-major little-endian float64 file per quantity;
    'csv' writes a single table with node indices, coordinates and one
    column per quantity (M^2 rows plus a header).
    """
    os.makedirs(path, exist_ok=True)
    grid = ms.grid
    M = grid.M
    fields = {q: np.asarray(field_values(ms, q, omega), dtype="<f8")
              for q in quantities}
    meta = {
        "problem": ms.model.name,
        "solver": ms.solver,
        "M": M,
        "h": grid.h,
        "xmin": grid.xmin,
        "ymin": grid.ymin,
        "init_region": {"kind": ms.region.kind, "r0": ms.region.r0},
        "quantities": list(quantities),
        "format": fmt,
        "dtype": "<f8",
        "order": "row-major (i*M + j)",
        "shape": [M, M],
    }
    if any(q in ("J", "absA", "reU") for q in quantities):
        meta["omega"] = omega
    written = []
    if fmt == "bin":
        for q, arr in fields.items():
            fn = os.path.join(path, f"{q}.bin")
            arr.reshape(-1).tofile(fn)
            written.append(fn)
    elif fmt == "csv":
        fn = os.path.join(path, "fields.csv")
        cols = ["i", "j", "x", "y"] + list(quantities)
        idx = np.arange(M * M)
        pts = grid.points().reshape(-1, 2)
        with open(fn, "w") as f:
            f.write(",".join(cols) + "\n")
            data = [idx // M, idx % M, pts[:, 0], pts[:, 1]]
            data += [fields[q].reshape(-1) for q in quantities]
            for row in zip(*data):
                f.write(",".join(
                    str(int(v)) if k < 2 else repr(float(v))
                    for k, v in enumerate(row)) + "\n")
        written.append(fn)
    else:
        raise ValueError(f"unknown dump format {fmt!r}")
    with open(os.path.join(path, "meta.json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    return written
