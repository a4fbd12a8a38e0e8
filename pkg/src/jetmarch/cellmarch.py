"""Cell-based partial-1-jet marching support.

The marching-time work (twist estimation, upwind averaging, coefficient
rebuilds) lives in the kernels; this module exposes the same primitives
with a numpy-friendly surface and provides the post-march passes used for
the 2-jet error tables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import impl as K


def estimate_txy(corner_gradients, h):
    """Corner mixed partials of one cell from its corner gradients.

    ``corner_gradients`` is a (4, 2) array in corner order (0,0), (1,0),
    (0,1), (1,1).  Central differences at the edge midpoints followed by
    bilinear extrapolation back to the corners, O(h^2) accurate.
    """
    g = np.asarray(corner_gradients, dtype=float)
    out = np.zeros(4)
    K.estimate_txy_corners(np.ascontiguousarray(g[:, 0]),
                           np.ascontiguousarray(g[:, 1]), float(h), out)
    return out


@dataclass
class BicubicCell:
    """16-coefficient Hermite interpolant on one grid cell.

    ``coeffs[m, n]`` multiplies u^m v^n with (u, v) the local coordinates
    on [0, 1]^2; (x0, y0) is the lower-left corner, h the side length.
    """

    coeffs: np.ndarray
    x0: float
    y0: float
    h: float
    valid: bool = True

    @classmethod
    def from_corner_data(cls, T, gx, gy, txy, x0, y0, h):
        """Build from corner jets in corner order (0,0), (1,0), (0,1), (1,1)."""
        out = np.zeros(16)
        K.build_coeffs(np.ascontiguousarray(T, dtype=float),
                       np.ascontiguousarray(gx, dtype=float),
                       np.ascontiguousarray(gy, dtype=float),
                       np.ascontiguousarray(txy, dtype=float), float(h), out)
        return cls(out.reshape(4, 4), float(x0), float(y0), float(h))

    def _local(self, x):
        u = (x[0] - self.x0) / self.h
        v = (x[1] - self.y0) / self.h
        if not (-1e-12 <= u <= 1 + 1e-12 and -1e-12 <= v <= 1 + 1e-12):
            raise ValueError(f"point {tuple(x)} outside cell")
        return u, v

    def eval(self, x):
        """(T, grad T, hess T) at a physical point inside the cell."""
        if not self.valid:
            raise ValueError("cell is not valid")
        u, v = self._local(np.asarray(x, dtype=float))
        out = np.zeros(6)
        K.eval_coeffs_jet(np.ascontiguousarray(self.coeffs.reshape(-1)), u, v,
                          self.h, out)
        grad = out[1:3].copy()
        hess = np.array([[out[3], out[4]], [out[4], out[5]]])
        return out[0], grad, hess


def get_cell(ms, c):
    """BicubicCell view of one cell of a completed (or running) march."""
    ci, cj = c
    grid = ms.grid
    cid = grid.cell_flat(c)
    return BicubicCell(ms.ccoef[cid].reshape(4, 4).copy(),
                       grid.xmin + ci * grid.h, grid.ymin + cj * grid.h,
                       grid.h, valid=bool(ms.cvalid[cid]))


def rebuild_all(ms):
    """Recompute all valid cells from the current nodal averages."""
    K.rebuild_valid_cells(ms.ks)


def _corner_weights():
    """(4, 3, 16) weights: hessian components at the 4 cell corners."""
    W = np.zeros((4, 3, 16))
    for c, (u, v) in enumerate([(0, 0), (1, 0), (0, 1), (1, 1)]):
        for m in range(4):
            for n in range(4):
                k = m * 4 + n
                if m >= 2:
                    W[c, 0, k] = m * (m - 1) * u ** (m - 2) * v**n
                if m >= 1 and n >= 1:
                    W[c, 1, k] = m * n * u ** (m - 1) * v ** (n - 1)
                if n >= 2:
                    W[c, 2, k] = n * (n - 1) * u**m * v ** (n - 2)
    return W


_W_CORNER = _corner_weights()


def nodal_second_partials(ms):
    """Per-node (T_xx, T_xy, T_yy) averaged over incident valid cells.

    Nodes with no incident valid cell get NaN (cannot happen after a
    completed cell march except on a 2x2 grid edge case).
    """
    grid = ms.grid
    M = grid.M
    if not ms.has_cells:
        raise ValueError("march carries no cell store")
    valid = ms.cvalid.astype(bool)
    coeffs = ms.ccoef
    acc = np.zeros((3, M, M))
    cnt = np.zeros((M, M))
    ci = np.arange(M - 1)
    for c, (du, dv) in enumerate([(0, 0), (1, 0), (0, 1), (1, 1)]):
        # hessian of every valid cell at this corner, vectorized
        hes = coeffs[valid] @ _W_CORNER[c].T / grid.h**2   # (#valid, 3)
        cells = np.flatnonzero(valid)
        ii = cells // (M - 1) + du
        jj = cells % (M - 1) + dv
        np.add.at(acc[0], (ii, jj), hes[:, 0])
        np.add.at(acc[1], (ii, jj), hes[:, 1])
        np.add.at(acc[2], (ii, jj), hes[:, 2])
        np.add.at(cnt, (ii, jj), 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = acc / cnt
    return out[0], out[1], out[2]
