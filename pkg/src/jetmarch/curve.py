"""Characteristic-approximation kernels.

A semi-Lagrangian update approximates the characteristic from a point
``x_lam`` on the base segment ``[x1, x2]`` to the update node ``xhat`` by a
short parametric curve, and evaluates Fermat's integral along it with
Simpson's rule.  Two parametrizations are supported: a cubic parametric
curve with endpoint tangents ``t_lam``/``t_hat``, and the graph of a cubic
over the chord with slopes ``b0``/``b1`` in the direction orthogonal to
the chord.  A simplified quadratic curve ties the two tangents together by
reflection across the chord.

This module is the plain reference implementation; the marching solvers
use the fused versions in the kernels, which the tests pin against these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _unit(v):
    n = float(np.hypot(v[0], v[1]))
    if n == 0.0:
        return v, 0.0
    return v / n, n


@dataclass(frozen=True)
class UpdateGeometry:
    """Geometry of one triangle update, frozen at a given lam.

    ``xlam = (1-lam)*x1 + lam*x2`` is the start of the candidate curve,
    ``L`` its chord length, ``ell`` the unit chord direction toward
    ``xhat`` and ``q`` the counterclockwise rotation of ``ell`` by pi/2.
    """

    xhat: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    lam: float
    xlam: np.ndarray
    L: float
    ell: np.ndarray
    q: np.ndarray

    @classmethod
    def make(cls, xhat, x1, x2, lam):
        xhat = np.asarray(xhat, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        xlam = (1.0 - lam) * x1 + lam * x2
        ell, L = _unit(xhat - xlam)
        if L == 0.0:
            raise ValueError("update node coincides with the base point")
        q = np.array([-ell[1], ell[0]])
        return cls(xhat, x1, x2, float(lam), xlam, L, ell, q)


@dataclass(frozen=True)
class CurveEval:
    """Midpoint position/velocity of a candidate curve plus its tangents."""

    phi_mid: np.ndarray
    dphi_mid: np.ndarray
    t_lam: np.ndarray | None = None
    t_hat: np.ndarray | None = None
    b0: float | None = None
    b1: float | None = None


def hermite_K(sigma, L):
    """Cubic Hermite basis pair on [0, L] and their derivatives.

    Returns ``(K0, K1, K0', K1')`` where K0, K1 vanish at both endpoints,
    K0'(0) = 1 = K1'(L) and K1'(0) = 0 = K0'(L).
    """
    if L <= 0:
        raise ValueError("chord length must be positive")
    k0 = sigma - 2.0 * sigma**2 / L + sigma**3 / L**2
    k1 = -(sigma**2) / L + sigma**3 / L**2
    dk0 = 1.0 - 4.0 * sigma / L + 3.0 * sigma**2 / L**2
    dk1 = -2.0 * sigma / L + 3.0 * sigma**2 / L**2
    return k0, k1, dk0, dk1


def cubic_curve_mid(geom, t_lam, t_hat):
    """Midpoint data of the cubic parametric curve with given unit tangents."""
    t_lam = np.asarray(t_lam, dtype=float)
    t_hat = np.asarray(t_hat, dtype=float)
    phi_mid = 0.5 * (geom.xlam + geom.xhat) + geom.L / 8.0 * (t_lam - t_hat)
    dphi_mid = 1.5 * geom.ell - 0.25 * (t_lam + t_hat)
    return CurveEval(phi_mid, dphi_mid, t_lam=t_lam, t_hat=t_hat)


def graph_curve_mid(geom, b0, b1):
    """Midpoint data of the graph-form curve with chord-orthogonal slopes."""
    zeta_mid = (b0 - b1) * geom.L / 8.0
    dzeta_mid = -(b0 + b1) / 4.0
    phi_mid = 0.5 * (geom.xlam + geom.xhat) + geom.q * zeta_mid
    dphi_mid = geom.ell + geom.q * dzeta_mid
    return CurveEval(phi_mid, dphi_mid, b0=float(b0), b1=float(b1))


def reflect_tangent(geom, t_hat):
    """Reflection of t_hat across the chord direction."""
    t_hat = np.asarray(t_hat, dtype=float)
    return 2.0 * geom.ell * (geom.ell @ t_hat) - t_hat


def quadratic_curve(geom, t_hat):
    """Midpoint data of the quadratic-curve simplification.

    The base tangent is the reflection of ``t_hat`` across the chord, which
    collapses the cubic's midpoint formulas to
    ``phi_mid = mid - (L/4) (I - ell ell^T) t_hat`` and a midpoint velocity
    of ``(3 - ell.t_hat)/2`` along the chord.
    """
    t_hat = np.asarray(t_hat, dtype=float)
    t_lam = reflect_tangent(geom, t_hat)
    dot = float(geom.ell @ t_hat)
    phi_mid = 0.5 * (geom.xlam + geom.xhat) - geom.L / 4.0 * (t_hat - geom.ell * dot)
    dphi_mid = 0.5 * (3.0 - dot) * geom.ell
    return CurveEval(phi_mid, dphi_mid, t_lam=t_lam, t_hat=t_hat)


def simpson_cost(geom, curve, T_base, model, form="curve"):
    """Fermat cost of a candidate curve by Simpson's rule.

    The curve form takes the endpoint speeds to be 1 (the cubic is
    approximately arc-length parametrized for short chords); the graph form
    uses the exact endpoint speeds ``sqrt(1 + b**2)``.
    """
    s0 = float(model.s(geom.xlam))
    s1 = float(model.s(geom.xhat))
    sm = float(model.s(curve.phi_mid))
    nrm = float(np.hypot(curve.dphi_mid[0], curve.dphi_mid[1]))
    if form == "curve":
        w0, w1 = 1.0, 1.0
    elif form == "graph":
        w0 = np.sqrt(1.0 + curve.b0**2)
        w1 = np.sqrt(1.0 + curve.b1**2)
    else:
        raise ValueError(f"unknown cost form {form!r}")
    return T_base + geom.L / 6.0 * (s0 * w0 + 4.0 * sm * nrm + s1 * w1)


def quadratic_cost(geom, t_hat, T_base, model):
    """Cost of the quadratic-curve update, Simpson middle weight folded in."""
    curve = quadratic_curve(geom, t_hat)
    s0 = float(model.s(geom.xlam))
    s1 = float(model.s(geom.xhat))
    sm = float(model.s(curve.phi_mid))
    dot = float(geom.ell @ np.asarray(t_hat, dtype=float))
    return T_base + geom.L / 6.0 * (s0 + 2.0 * (3.0 - dot) * sm + s1), curve


def general_cost(geom, T_base, model, t_lam, t_hat):
    """Reference Simpson cost with no arc-length assumption.

    Evaluates the full integrand speed at both endpoints and the midpoint
    from the actual cubic-curve velocities.  Used only by tests to bound
    what the simplified curve-form cost discards.
    """
    t_lam = np.asarray(t_lam, dtype=float)
    t_hat = np.asarray(t_hat, dtype=float)
    # endpoint velocities of ell + delta_phi are exactly the given tangents
    curve = cubic_curve_mid(geom, t_lam, t_hat)
    s0 = float(model.s(geom.xlam))
    s1 = float(model.s(geom.xhat))
    sm = float(model.s(curve.phi_mid))
    n0 = float(np.hypot(t_lam[0], t_lam[1]))
    n1 = float(np.hypot(t_hat[0], t_hat[1]))
    nm = float(np.hypot(curve.dphi_mid[0], curve.dphi_mid[1]))
    return T_base + geom.L / 6.0 * (s0 * n0 + 4.0 * sm * nm + s1 * n1)
