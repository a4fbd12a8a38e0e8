"""Label-setting driver: states, heap, ground-truth initialization, main loop.

A march owns flat per-node arrays (state, T, gradient, update provenance)
plus, for the cell-marching solver, the bicubic cell store.  The kernels
operate on typed views of these arrays; this module only orchestrates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid2
from .kernels import impl as K

FAR = 0
TRIAL = 1
VALID = 2

SOLVER_NAMES = ("jmm1", "jmm1g", "jmm2", "jmm2g", "jmm3", "jmm3g", "jmm4",
                "fmm", "olim8mp0")

_VARIANT_CODES = {
    "jmm1": K.V_JMM1,
    "jmm1g": K.V_JMM1G,
    "jmm2": K.V_JMM2,
    "jmm2g": K.V_JMM2G,
    "jmm3": K.V_JMM3,
    "jmm3g": K.V_JMM3G,
    "jmm4": K.V_JMM4,
    "fmm": K.V_FMM,
    "olim8mp0": K.V_OLIM8,
}

STAT_FIELDS = ("solves", "converged", "converged_fast", "iterations",
               "rejected_discriminant", "rejected_noncausal", "boundary_minima")


@dataclass(frozen=True)
class InitRegion:
    """Ground-truth initialization region around the source.

    kind 'box' and 'disk' take a physical half-width / radius r0; 'slab'
    initializes the rows j = 0 .. floor(C/h) with C = r0.
    """

    kind: str = "box"
    r0: float = 0.1

    def mask(self, grid, source):
        pts = grid.points()
        dx = pts[..., 0] - source[0]
        dy = pts[..., 1] - source[1]
        if self.kind == "box":
            return np.maximum(np.abs(dx), np.abs(dy)) <= self.r0 + 1e-12
        if self.kind == "disk":
            return np.hypot(dx, dy) <= self.r0 + 1e-12
        if self.kind == "slab":
            n_slab = int(np.floor(self.r0 / grid.h))
            j = np.arange(grid.M)
            return np.broadcast_to(j[None, :] <= n_slab, (grid.M, grid.M))
        raise ValueError(f"unknown init region kind {self.kind!r}")


class MarchState:
    """All mutable state of one solver run."""

    def __init__(self, grid, model, solver, stencil="eight", region=None,
                 track_spreading=False):
        if solver not in _VARIANT_CODES:
            raise ValueError(f"unknown solver {solver!r}, expected one of {SOLVER_NAMES}")
        if stencil not in ("four", "eight"):
            raise ValueError(f"unknown stencil {stencil!r}")
        self.grid = grid
        self.model = model
        self.solver = solver
        self.stencil = stencil
        self.region = region if region is not None else InitRegion()
        self.track_spreading = track_spreading

        N = grid.node_count
        self.state = np.full(N, FAR, dtype=np.intc)
        self.T = np.full(N, np.inf)
        self.gx = np.zeros(N)
        self.gy = np.zeros(N)
        self.heap = np.zeros(N, dtype=np.intc)
        self.hpos = np.full(N, -1, dtype=np.intc)
        self.hn = np.zeros(1, dtype=np.int64)
        self.par1 = np.full(N, -1, dtype=np.intc)
        self.par2 = np.full(N, -1, dtype=np.intc)
        self.plam = np.zeros(N)
        self.pL = np.zeros(N)
        self.ptx = np.zeros(N)
        self.pty = np.zeros(N)
        self.region_mask = np.zeros(N, dtype=np.intc)
        self.stats = np.zeros(8, dtype=np.int64)
        self.scratch = np.zeros(64)

        self.has_cells = solver == "jmm4" or track_spreading
        nc = grid.cell_count if self.has_cells else 1
        self.ccoef = np.zeros((nc, 16))
        self.cvalid = np.zeros(nc, dtype=np.intc)
        self.txy_sum = np.zeros(N if self.has_cells else 1)
        self.txy_cnt = np.zeros(N if self.has_cells else 1, dtype=np.intc)
        self.region_txy = np.zeros(N if self.has_cells else 1)

        self.J = np.zeros(N) if track_spreading else None
        self.pop_count = 0
        self.done = False

        kind, s0, vx, vy = model.kernel_params
        self.ks = K.KernelState(
            grid.M, grid.h, grid.xmin, grid.ymin, kind, s0, vx, vy,
            _VARIANT_CODES[solver], 8 if stencil == "eight" else 4,
            self.state, self.T, self.gx, self.gy,
            self.heap, self.hpos, self.hn,
            self.par1, self.par2, self.plam, self.pL, self.ptx, self.pty,
            1 if self.has_cells else 0, self.ccoef, self.cvalid,
            self.txy_sum, self.txy_cnt, self.region_mask, self.region_txy,
            self.stats, self.scratch)

    @property
    def stat_dict(self):
        return dict(zip(STAT_FIELDS, self.stats[: len(STAT_FIELDS)].tolist()))

    def jets(self):
        """(T, gx, gy) as (M, M) views."""
        M = self.grid.M
        return (self.T.reshape(M, M), self.gx.reshape(M, M), self.gy.reshape(M, M))


def initialize(grid, model, solver, stencil="eight", region=None,
               track_spreading=False):
    """Seed a march with exact jets in the init region around the source.

    Every node of the region becomes trial with the ground-truth (T, grad T);
    the source node itself stores a zero gradient and is excluded from error
    norms downstream.  For the cell-marching solver the region also gets
    analytic mixed partials and fully interior cells are built immediately.
    """
    if track_spreading and solver != "jmm4":
        # the spreading recurrence consumes cell Laplacians
        raise ValueError("spreading tracking requires the jmm4 solver")
    ms = MarchState(grid, model, solver, stencil, region, track_spreading)

    mask2 = ms.region.mask(grid, model.source)
    if not mask2.any():
        raise ValueError("initialization region contains no grid nodes")
    pts = grid.points()[mask2]
    flat = np.flatnonzero(mask2.reshape(-1))
    r2 = (pts[:, 0] - model.source[0]) ** 2 + (pts[:, 1] - model.source[1]) ** 2
    at_src = r2 == 0.0

    ms.T[flat] = model.tau(pts)
    g = np.zeros_like(pts)
    if (~at_src).any():
        g[~at_src] = model.grad_tau(pts[~at_src])
    ms.gx[flat] = g[:, 0]
    ms.gy[flat] = g[:, 1]
    ms.state[flat] = TRIAL
    ms.region_mask[flat] = 1

    if ms.has_cells:
        txy = np.zeros(len(flat))
        if (~at_src).any():
            txy[~at_src] = model.hess_tau(pts[~at_src])[:, 0, 1]
        ms.region_txy[flat] = txy
        K.init_region_cells(ms.ks)

    if ms.track_spreading:
        ms.J[flat] = np.sqrt(r2)

    for n in flat:
        K.heap_push(ms.T, ms.heap, ms.hpos, ms.hn, int(n))
    return ms


def march(ms, on_accept=None, paranoid=False):
    """Run label setting to completion.

    ``on_accept(ms, node)`` is called right after a node becomes valid (and
    after incident cells are finalized), which is where the geometric
    spreading recurrence hooks in.  ``paranoid`` snapshots every value at
    acceptance and verifies the label-setting write barrier at the end.
    """
    ks = ms.ks
    has_cells = ms.has_cells
    pop = K.pop_node
    fin = K.finalize_cells
    upd = K.update_neighbors
    accepted = [] if paranoid else None
    while True:
        node = pop(ks)
        if node < 0:
            break
        ms.pop_count += 1
        if paranoid:
            accepted.append((node, ms.T[node]))
        if has_cells:
            fin(ks, node)
        if on_accept is not None:
            on_accept(ms, node)
        upd(ks, node)
    if paranoid:
        for node, val in accepted:
            if ms.T[node] != val:
                raise AssertionError(
                    f"label-setting violated: node {node} changed after "
                    "becoming valid")
    ms.done = True
    return ms
