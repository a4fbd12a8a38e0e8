"""Friendly wrappers around the per-node update solvers.

These run single updates outside a march (tests, the consistency study)
and expose the bottom-up candidate of a node given a prepared MarchState.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import impl as K
from .marcher import MarchState, _VARIANT_CODES

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1
STATUS_REJECTED = 2
STATUS_BOUNDARY = 3


@dataclass(frozen=True)
class UpdateResult:
    value: float
    grad: np.ndarray
    lam: float
    t_lam: np.ndarray
    t_hat: np.ndarray
    L: float
    converged: bool
    boundary: bool
    iterations: int


def _scratch_state(model, solver, h):
    """Minimal MarchState used only as a kernel-scratch carrier."""
    from .grid import Grid2

    grid = Grid2(0.0, 0.0, 2, h)
    return MarchState(grid, model, solver)


def solve_update(model, solver, xhat, x1, x2, T1, T2, g1, g2,
                 lam0=0.25, t_hat0=None, h=None, ms=None, cellid=-1):
    """Solve one triangle update with explicit base jets.

    The warm start ``t_hat0`` defaults to the chord direction from x1 to
    xhat.  Returns an UpdateResult; non-converged or rejected solves come
    back with converged=False and value=inf.
    """
    xhat = np.asarray(xhat, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if t_hat0 is None:
        d = xhat - x1
        th0 = float(np.arctan2(d[1], d[0]))
    else:
        th0 = float(np.arctan2(t_hat0[1], t_hat0[0]))
    if ms is None:
        if h is None:
            h = float(np.linalg.norm(x2 - x1))
        ms = _scratch_state(model, solver, h)
    status, F, lam, tl, th, L, iters = K.solve_triangle(
        ms.ks, _VARIANT_CODES[solver],
        float(x1[0]), float(x1[1]), float(x2[0]), float(x2[1]),
        float(xhat[0]), float(xhat[1]), float(T1), float(T2),
        float(g1[0]), float(g1[1]), float(g2[0]), float(g2[1]),
        float(lam0), th0, cellid)
    sh = float(model.s(xhat))
    if status in (STATUS_NO_CONVERGENCE, STATUS_REJECTED):
        return UpdateResult(np.inf, np.zeros(2), float(lam), np.zeros(2),
                            np.zeros(2), float(L), False, False, iters)
    th = np.asarray(th)
    return UpdateResult(float(F), sh * th, float(lam), np.asarray(tl), th,
                        float(L), True, status == STATUS_BOUNDARY, iters)


def cost_and_gradient(model, solver, xhat, x1, x2, T1, T2, g1, g2, u,
                      h=None, ms=None):
    """Cost F and its analytic gradient in the active variables at u.

    u is (lam, theta_lam, theta_hat) for jmm1, (lam, b0, b1) for jmm1g and
    (lam, angle-or-slope) for the two-variable solvers; trailing entries
    are ignored where unused.
    """
    xhat = np.asarray(xhat, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if ms is None:
        if h is None:
            h = float(np.linalg.norm(x2 - x1))
        ms = _scratch_state(model, solver, h)
    u = np.asarray(u, dtype=float)
    u = np.concatenate([u, np.zeros(3 - len(u))])
    F, g, fail = K.triangle_cost(
        ms.ks, _VARIANT_CODES[solver],
        float(x1[0]), float(x1[1]), float(x2[0]), float(x2[1]),
        float(xhat[0]), float(xhat[1]), float(T1), float(T2),
        float(g1[0]), float(g1[1]), float(g2[0]), float(g2[1]),
        float(u[0]), float(u[1]), float(u[2]), 1)
    if fail:
        raise ValueError("cost rejected at this configuration")
    return float(F), np.asarray(g)


def line_update(model, x1, xhat, T1):
    """One-point Simpson update along the straight segment x1 -> xhat."""
    x1 = np.asarray(x1, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    kind, s0, vx, vy = model.kernel_params
    value = K.line_value(kind, s0, vx, vy, float(x1[0]), float(x1[1]),
                         float(xhat[0]), float(xhat[1]), float(T1))
    d = xhat - x1
    L = float(np.linalg.norm(d))
    ell = d / L
    sh = float(model.s(xhat))
    return UpdateResult(float(value), sh * ell, 0.0, ell.copy(), ell.copy(),
                        L, True, False, 0)


def bottom_up_update(ms, node):
    """Candidate value for one node of a prepared march (jet written on
    improvement, exactly as the marching loop would)."""
    flat = ms.grid.flat(node) if isinstance(node, tuple) else int(node)
    return float(K.update_node(ms.ks, flat))
