"""Geometric spreading and WKB amplitude for linear speeds of sound.

Along each accepted update the spreading J obeys a one-step recurrence
obtained by integrating the ray-tube equations exactly for a linear speed:
the ray-tube matrix stays linear in the integrated speed, so

    J(xhat) = |1 + eps * (lap T(x_lam) - t_lam . grad s(x_lam))| * J(x_lam)

with eps the speed integrated along the segment (trapezoid rule, exact up
to the curvature of the characteristic).  The Laplacian comes from the
bicubic cell store, so spreading rides on the cell-marching solver.
"""

from __future__ import annotations

import numpy as np

from .kernels import impl as K
from .marcher import initialize, march


def _require_linear_speed(model):
    coeffs = model.speed_coeffs
    if coeffs is None:
        raise ValueError(
            f"model {model.name!r} has a nonlinear speed; the spreading "
            "recurrence supports linear speeds only")
    return coeffs


def spreading_update(xhat, x_lam, lam, J1, J2, lap1, lap2, t_lam, model):
    """One spreading step from interpolated base data.

    J1, J2 and lap1, lap2 are the spreading and Laplacian of T at the two
    base vertices; linear interpolation at lam supplies the values at
    x_lam.  NaN Laplacians (no incident valid cell yet) fall back to pure
    transport of the interpolated spreading.
    """
    c0, cv = _require_linear_speed(model)
    xhat = np.asarray(xhat, dtype=float)
    x_lam = np.asarray(x_lam, dtype=float)
    Jlam = (1.0 - lam) * J1 + lam * J2
    lap = (1.0 - lam) * lap1 + lam * lap2
    if np.isnan(lap):
        lap = lap1 if not np.isnan(lap1) else lap2
    if np.isnan(lap):
        return Jlam
    L = float(np.linalg.norm(xhat - x_lam))
    eps = L * (c0 + cv @ (xhat + x_lam) / 2.0)
    gs = model.grad_s(x_lam)
    trace = lap - float(t_lam @ gs)
    return abs(1.0 + eps * trace) * Jlam


def _accept_spreading(ms, node):
    if ms.region_mask[node]:
        return
    p1 = int(ms.par1[node])
    if p1 < 0:
        return
    p2 = int(ms.par2[node])
    lam = float(ms.plam[node])
    lap1 = K.nodal_laplacian(ms.ks, p1)
    if p2 >= 0:
        lap2 = K.nodal_laplacian(ms.ks, p2)
        J2 = ms.J[p2]
    else:
        lam = 0.0
        lap2 = np.nan
        J2 = 0.0
    grid = ms.grid
    i, j = grid.unflat(node)
    i1, j1 = grid.unflat(p1)
    x1 = np.array(grid.point((i1, j1)))
    if p2 >= 0:
        x2 = np.array(grid.point(grid.unflat(p2)))
    else:
        x2 = x1
    x_lam = (1.0 - lam) * x1 + lam * x2
    t_lam = np.array([ms.ptx[node], ms.pty[node]])
    ms.J[node] = spreading_update(
        np.array(grid.point((i, j))), x_lam, lam, ms.J[p1], J2,
        lap1, lap2, t_lam, ms.model)


def march_with_spreading(grid, model, region=None, stencil="eight"):
    """Run the cell-marching solver and march the spreading alongside T."""
    _require_linear_speed(model)
    ms = initialize(grid, model, "jmm4", stencil=stencil, region=region,
                    track_spreading=True)
    return march(ms, on_accept=_accept_spreading)


def amplitude_from_spreading(J, x, model, omega):
    """Two-dimensional point-source amplitude ``e^{i pi/4}/(2 sqrt(2 pi w))
    * sqrt(c/J)``; J must be positive."""
    if omega <= 0:
        raise ValueError("frequency must be positive")
    J = np.asarray(J, dtype=float)
    if np.any(J <= 0):
        raise ValueError("amplitude is singular where the spreading vanishes")
    c = np.asarray(model.c(np.asarray(x, dtype=float)))
    phase = np.exp(1j * np.pi / 4.0)
    return phase / (2.0 * np.sqrt(2.0 * np.pi * omega)) * np.sqrt(c / J)


def helmholtz_field(T, A, omega):
    """WKB field U = A exp(i omega T) from nodal eikonal and amplitude."""
    return np.asarray(A) * np.exp(1j * omega * np.asarray(T, dtype=float))


def amplitude_fields(ms, omega):
    """(J, A, U) nodal fields of a completed spreading march.

    The source node (J = 0) gets A = U = NaN; callers exclude it from
    error norms just like the eikonal derivatives.
    """
    if ms.J is None:
        raise ValueError("march did not track spreading")
    M = ms.grid.M
    J = ms.J.reshape(M, M)
    A = np.full((M, M), np.nan + 0j)
    ok = J > 0
    pts = ms.grid.points()
    A[ok] = amplitude_from_spreading(J[ok], pts[ok], ms.model, omega)
    U = helmholtz_field(ms.T.reshape(M, M), A, omega)
    return J, A, U
