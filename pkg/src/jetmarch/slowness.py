"""Slowness models for the test problems.

Each model provides the slowness ``s``, speed ``c = 1/s``, their gradients,
and a closed-form solution ``tau`` of the point-source eikonal problem with
its gradient and Hessian, used for ground-truth initialization and error
measurement.  All derivatives here are hand-derived analytic expressions
(no internal finite differencing); the test suite checks them against
central differences.

Point sources sit at the origin for every model, which is what the
closed-form solutions assume.
"""

from __future__ import annotations

import numpy as np

# kind codes shared with the compiled kernels
KIND_CONSTANT = 0
KIND_LINEAR = 1
KIND_SINE = 2
KIND_SLOTH = 3


class SlownessModel:
    """Analytic slowness field with a closed-form eikonal.

    Parameters
    ----------
    name : str
        Registry key ('constant', 'linear1', 'linear2', 'sine', 'sloth',
        'counterexample').
    kind : int
        Kernel kind code.
    s0 : float
        Scalar slowness scale.
    v : (2,) array_like
        Model coefficient vector.
    domain : (xmin, ymin, extent)
        Square domain the model is defined on.
    """

    def __init__(self, name, kind, s0, v, domain):
        self.name = name
        self.kind = kind
        self.s0 = float(s0)
        self.v = np.asarray(v, dtype=float)
        self.domain = tuple(float(t) for t in domain)
        self.source = np.zeros(2)
        self._validate_domain()

    def _validate_domain(self):
        xmin, ymin, ext = self.domain
        ax = np.linspace(xmin, xmin + ext, 11)
        ay = np.linspace(ymin, ymin + ext, 11)
        pts = np.stack(np.meshgrid(ax, ay, indexing="ij"), axis=-1)
        s = self.s(pts)  # raises on hard violations
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ValueError(
                f"slowness of {self.name!r} is not positive and finite on "
                "its domain with these coefficients")

    def __repr__(self):
        return f"SlownessModel({self.name!r}, s0={self.s0}, v={tuple(self.v)})"

    @property
    def kernel_params(self):
        """(kind, s0, vx, vy) consumed by the update kernels."""
        return (self.kind, self.s0, float(self.v[0]), float(self.v[1]))

    @property
    def speed_coeffs(self):
        """(c0, cv) with c(x) = c0 + cv.x when the speed is linear, else None."""
        if self.kind == KIND_CONSTANT:
            return (1.0 / self.s0, np.zeros(2))
        if self.kind == KIND_LINEAR:
            return (1.0 / self.s0, self.v.copy())
        return None

    # -- slowness ----------------------------------------------------------

    def s(self, x):
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        if self.kind == KIND_CONSTANT:
            return np.broadcast_to(self.s0, x1.shape).copy()
        if self.kind == KIND_LINEAR:
            den = 1.0 / self.s0 + self.v[0] * x1 + self.v[1] * x2
            if np.any(den <= 0):
                raise ValueError("linear slowness undefined: 1/s0 + v.x <= 0")
            return 1.0 / den
        if self.kind == KIND_SINE:
            a = np.sin(x1 + x2)
            return np.sqrt(a * a + (x1 + a) ** 2)
        if self.kind == KIND_SLOTH:
            arg = self.s0**2 + 2.0 * (self.v[0] * x1 + self.v[1] * x2)
            if np.any(arg <= 0):
                raise ValueError("sloth slowness undefined: s0^2 + 2 v.x <= 0")
            return np.sqrt(arg)
        raise AssertionError(self.kind)

    def grad_s(self, x):
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        out = np.zeros(x.shape)
        if self.kind == KIND_CONSTANT:
            return out
        if self.kind == KIND_LINEAR:
            s = self.s(x)
            out[..., 0] = -s * s * self.v[0]
            out[..., 1] = -s * s * self.v[1]
            return out
        if self.kind == KIND_SINE:
            a = np.sin(x1 + x2)
            ca = np.cos(x1 + x2)
            b = x1 + a
            s = np.sqrt(a * a + b * b)
            out[..., 0] = (a * ca + b * (1.0 + ca)) / s
            out[..., 1] = (a * ca + b * ca) / s
            return out
        if self.kind == KIND_SLOTH:
            s = self.s(x)
            out[..., 0] = self.v[0] / s
            out[..., 1] = self.v[1] / s
            return out
        raise AssertionError(self.kind)

    def c(self, x):
        return 1.0 / self.s(x)

    def grad_c(self, x):
        s = self.s(np.asarray(x, dtype=float))
        return -self.grad_s(x) / (s * s)[..., None]

    # -- exact eikonal -------------------------------------------------------

    def tau(self, x):
        x = np.asarray(x, dtype=float)
        x1, x2 = x[..., 0], x[..., 1]
        if self.kind == KIND_CONSTANT:
            return self.s0 * np.hypot(x1, x2)
        if self.kind == KIND_LINEAR:
            nv = np.linalg.norm(self.v)
            r2 = x1 * x1 + x2 * x2
            w = 1.0 + 0.5 * self.s0 * self.s(x) * nv * nv * r2
            return np.arccosh(w) / nv
        if self.kind == KIND_SINE:
            return 0.5 * x1 * x1 + 2.0 * np.sin(0.5 * (x1 + x2)) ** 2
        if self.kind == KIND_SLOTH:
            sig = self._sloth_sigma(x1, x2)
            ad = self.v[0] * x1 + self.v[1] * x2
            na2 = self.v @ self.v
            return (self.s0**2 + ad) * sig - na2 * sig**3 / 6.0
        raise AssertionError(self.kind)

    def grad_tau(self, x):
        x = np.asarray(x, dtype=float)
        self._check_off_source(x)
        x1, x2 = x[..., 0], x[..., 1]
        out = np.empty(x.shape)
        if self.kind == KIND_CONSTANT:
            r = np.hypot(x1, x2)
            out[..., 0] = self.s0 * x1 / r
            out[..., 1] = self.s0 * x2 / r
            return out
        if self.kind == KIND_LINEAR:
            nv = np.linalg.norm(self.v)
            w, gw = self._linear_w_and_grad(x)
            den = nv * np.sqrt(w * w - 1.0)
            return gw / den[..., None]
        if self.kind == KIND_SINE:
            a = np.sin(x1 + x2)
            out[..., 0] = x1 + a
            out[..., 1] = a
            return out
        if self.kind == KIND_SLOTH:
            sig = self._sloth_sigma(x1, x2)
            out[..., 0] = x1 / sig + 0.5 * self.v[0] * sig
            out[..., 1] = x2 / sig + 0.5 * self.v[1] * sig
            return out
        raise AssertionError(self.kind)

    def hess_tau(self, x):
        x = np.asarray(x, dtype=float)
        self._check_off_source(x)
        x1, x2 = x[..., 0], x[..., 1]
        out = np.empty(x.shape + (2,))
        if self.kind == KIND_CONSTANT:
            r = np.hypot(x1, x2)
            u1, u2 = x1 / r, x2 / r
            out[..., 0, 0] = self.s0 * (1.0 - u1 * u1) / r
            out[..., 0, 1] = self.s0 * (-u1 * u2) / r
            out[..., 1, 0] = out[..., 0, 1]
            out[..., 1, 1] = self.s0 * (1.0 - u2 * u2) / r
            return out
        if self.kind == KIND_LINEAR:
            return self._linear_hess(x)
        if self.kind == KIND_SINE:
            ca = np.cos(x1 + x2)
            out[..., 0, 0] = 1.0 + ca
            out[..., 0, 1] = ca
            out[..., 1, 0] = ca
            out[..., 1, 1] = ca
            return out
        if self.kind == KIND_SLOTH:
            return self._sloth_hess(x)
        raise AssertionError(self.kind)

    # -- internals -----------------------------------------------------------

    def _check_off_source(self, x):
        r2 = np.asarray(x)[..., 0] ** 2 + np.asarray(x)[..., 1] ** 2
        if np.any(r2 == 0.0):
            raise ValueError("eikonal derivatives are singular at the source")

    def _linear_w_and_grad(self, x):
        x1, x2 = x[..., 0], x[..., 1]
        s = self.s(x)
        k = 0.5 * self.s0 * (self.v @ self.v)
        r2 = x1 * x1 + x2 * x2
        w = 1.0 + k * s * r2
        gs = self.grad_s(x)
        gw = k * (gs * r2[..., None] + 2.0 * s[..., None] * x)
        return w, gw

    def _linear_hess(self, x):
        nv = np.linalg.norm(self.v)
        s = self.s(x)
        k = 0.5 * self.s0 * (self.v @ self.v)
        r2 = x[..., 0] ** 2 + x[..., 1] ** 2
        w, gw = self._linear_w_and_grad(x)
        gs = self.grad_s(x)
        # hess of s and of w
        hs = 2.0 * s[..., None, None] ** 3 * np.einsum("i,j->ij", self.v, self.v)
        hw = k * (
            r2[..., None, None] * hs
            + 2.0 * (gs[..., :, None] * x[..., None, :] + x[..., :, None] * gs[..., None, :])
            + 2.0 * s[..., None, None] * np.eye(2)
        )
        root = np.sqrt(w * w - 1.0)
        d1 = 1.0 / (nv * root)
        d2 = -w / (nv * root**3)
        return (
            d2[..., None, None] * gw[..., :, None] * gw[..., None, :]
            + d1[..., None, None] * hw
        )

    def _sloth_sigma(self, x1, x2):
        na2 = self.v @ self.v
        ad = self.v[0] * x1 + self.v[1] * x2
        d2 = x1 * x1 + x2 * x2
        if na2 == 0.0:
            # straight rays; sigma = |x| / s0
            return np.sqrt(d2) / self.s0
        A = na2 / 4.0
        B = -(self.s0**2 + ad)
        disc = B * B - 4.0 * A * d2
        if np.any(disc < 0):
            raise ValueError("sloth eikonal undefined (caustic region)")
        u = (-B - np.sqrt(disc)) / (2.0 * A)
        return np.sqrt(u)

    def _sloth_hess(self, x):
        x1, x2 = x[..., 0], x[..., 1]
        na2 = self.v @ self.v
        sig = self._sloth_sigma(x1, x2)
        u = sig * sig
        B = -(self.s0**2 + (self.v[0] * x1 + self.v[1] * x2))
        den = 2.0 * (na2 / 4.0) * u + B
        p = np.empty(x.shape)
        p[..., 0] = 0.5 * self.v[0] - x1 / u
        p[..., 1] = 0.5 * self.v[1] - x2 / u
        kap = (sig / den)[..., None, None]
        eye = np.eye(2)
        return eye / sig[..., None, None] + kap * p[..., :, None] * p[..., None, :]


_DEFAULTS = {
    "constant": dict(kind=KIND_CONSTANT, s0=1.0, v=(0.0, 0.0), domain=(-1.0, -1.0, 2.0)),
    "linear1": dict(kind=KIND_LINEAR, s0=1.0, v=(0.133, -0.0933), domain=(-1.0, -1.0, 2.0)),
    "linear2": dict(kind=KIND_LINEAR, s0=2.0, v=(0.5, 0.0), domain=(0.0, 0.0, 1.0)),
    "sine": dict(kind=KIND_SINE, s0=1.0, v=(0.0, 0.0), domain=(-1.0, -1.0, 2.0)),
    "sloth": dict(kind=KIND_SLOTH, s0=2.0, v=(0.0, -3.0), domain=(0.0, 0.0, 0.5)),
    # same linear speed as linear2, on the quadrant domain of the stencil study
    "counterexample": dict(kind=KIND_LINEAR, s0=2.0, v=(0.5, 0.0), domain=(0.0, 0.0, 1.0)),
}

MODEL_NAMES = tuple(_DEFAULTS)


def get_model(name, s0=None, v=None):
    """Look up a test problem by name, optionally overriding coefficients."""
    try:
        spec = dict(_DEFAULTS[name])
    except KeyError:
        raise ValueError(f"unknown model {name!r}, expected one of {MODEL_NAMES}") from None
    if s0 is not None:
        spec["s0"] = s0
    if v is not None:
        spec["v"] = v
    return SlownessModel(name, spec["kind"], spec["s0"], spec["v"], spec["domain"])
