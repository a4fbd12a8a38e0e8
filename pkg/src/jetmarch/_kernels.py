"""Hot per-node update kernels, in Cython pure-Python mode.

This file is both the pure-Python fallback (imported directly) and the
source of the compiled extension (``_ckernels.pyx`` includes it).  Keep it
free of numpy calls in the inner loops: everything below works on scalars
and typed memoryviews so the compiled version runs at C speed.

Layout conventions shared with the Python layer:
  - nodes are flat ``i*M + j``; node (i, j) sits at (xmin + i*h, ymin + j*h)
  - cells are flat ``ci*(M-1) + cj``; row c of ``ccoef`` holds a[m*4+n] with
    T(u, v) = sum a_mn u^m v^n on the unit cell, u = (x - cell_x)/h
  - states: 0 = far, 1 = trial, 2 = valid
  - stats: [solves, converged, converged<=10 iters, total iters,
            discriminant rejects, non-causal rejects, boundary minima]
"""

import cython

from math import atan2, cos, sin, sqrt

INF = float("inf")
NAN = float("nan")

FAR = 0
TRIAL = 1
VALID = 2

# solver variant codes
V_JMM1 = 0
V_JMM1G = 1
V_JMM2 = 2
V_JMM2G = 3
V_JMM3 = 4
V_JMM3G = 5
V_JMM4 = 6
V_FMM = 7
V_OLIM8 = 8

# model kind codes (match slowness.py)
K_CONSTANT = 0
K_LINEAR = 1
K_SINE = 2
K_SLOTH = 3

# Newton controls
_MAXIT = 20
_STEP_TOL = 1e-12
_GRAD_TOL = 1e-13
_CAUSAL_SLACK = 1e-12


def is_compiled():
    return cython.compiled


@cython.cfunc
@cython.exceptval(check=False)
def _fabs(x: cython.double) -> cython.double:
    return -x if x < 0.0 else x


# ---------------------------------------------------------------------------
# ring offsets: CCW king moves starting from (+1, 0)
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.exceptval(check=False)
def _ring_di(k: cython.int) -> cython.int:
    if k == 0 or k == 1 or k == 7:
        return 1
    if 3 <= k <= 5:
        return -1
    return 0


@cython.cfunc
@cython.exceptval(check=False)
def _ring_dj(k: cython.int) -> cython.int:
    if 1 <= k <= 3:
        return 1
    if 5 <= k <= 7:
        return -1
    return 0


# ---------------------------------------------------------------------------
# scalar slowness evaluation
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.exceptval(check=False)
def _s_val(kind: cython.int, s0: cython.double, vx: cython.double,
           vy: cython.double, x: cython.double, y: cython.double) -> cython.double:
    a: cython.double
    b: cython.double
    if kind == K_CONSTANT:
        return s0
    if kind == K_LINEAR:
        return 1.0 / (1.0 / s0 + vx * x + vy * y)
    if kind == K_SINE:
        a = sin(x + y)
        b = x + a
        return sqrt(a * a + b * b)
    # sloth
    return sqrt(s0 * s0 + 2.0 * (vx * x + vy * y))


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _s_grad(kind: cython.int, s0: cython.double, vx: cython.double,
            vy: cython.double, x: cython.double, y: cython.double,
            out: cython.double[::1]) -> cython.double:
    """Writes grad s into out[0:2]; returns s."""
    s: cython.double
    a: cython.double
    b: cython.double
    ca: cython.double
    if kind == K_CONSTANT:
        out[0] = 0.0
        out[1] = 0.0
        return s0
    if kind == K_LINEAR:
        s = 1.0 / (1.0 / s0 + vx * x + vy * y)
        out[0] = -s * s * vx
        out[1] = -s * s * vy
        return s
    if kind == K_SINE:
        a = sin(x + y)
        ca = cos(x + y)
        b = x + a
        s = sqrt(a * a + b * b)
        out[0] = (a * ca + b * (1.0 + ca)) / s
        out[1] = (a * ca + b * ca) / s
        return s
    s = sqrt(s0 * s0 + 2.0 * (vx * x + vy * y))
    out[0] = vx / s
    out[1] = vy / s
    return s


# ---------------------------------------------------------------------------
# binary min-heap keyed on T with back-pointers
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _heap_sift_up(T: cython.double[::1], heap: cython.int[::1],
                  pos: cython.int[::1], i: cython.Py_ssize_t) -> cython.Py_ssize_t:
    node: cython.int = heap[i]
    key: cython.double = T[node]
    p: cython.Py_ssize_t
    while i > 0:
        p = (i - 1) // 2
        if T[heap[p]] <= key:
            break
        heap[i] = heap[p]
        pos[heap[p]] = i
        i = p
    heap[i] = node
    pos[node] = i
    return i


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _heap_sift_down(T: cython.double[::1], heap: cython.int[::1],
                    pos: cython.int[::1], n: cython.Py_ssize_t,
                    i: cython.Py_ssize_t) -> cython.Py_ssize_t:
    node: cython.int = heap[i]
    key: cython.double = T[node]
    c: cython.Py_ssize_t
    r: cython.Py_ssize_t
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        r = c + 1
        if r < n and T[heap[r]] < T[heap[c]]:
            c = r
        if T[heap[c]] >= key:
            break
        heap[i] = heap[c]
        pos[heap[c]] = i
        i = c
    heap[i] = node
    pos[node] = i
    return i


@cython.ccall
@cython.boundscheck(False)
def heap_push(T: cython.double[::1], heap: cython.int[::1],
              pos: cython.int[::1], hn: cython.longlong[::1],
              node: cython.Py_ssize_t):
    n: cython.Py_ssize_t = hn[0]
    heap[n] = node
    pos[node] = n
    hn[0] = n + 1
    _heap_sift_up(T, heap, pos, n)


@cython.ccall
@cython.boundscheck(False)
def heap_pop(T: cython.double[::1], heap: cython.int[::1],
             pos: cython.int[::1], hn: cython.longlong[::1]) -> cython.Py_ssize_t:
    n: cython.Py_ssize_t = hn[0]
    if n == 0:
        return -1
    top: cython.int = heap[0]
    pos[top] = -1
    n -= 1
    hn[0] = n
    if n > 0:
        heap[0] = heap[n]
        pos[heap[0]] = 0
        _heap_sift_down(T, heap, pos, n, 0)
    return top


@cython.ccall
@cython.boundscheck(False)
def heap_decrease(T: cython.double[::1], heap: cython.int[::1],
                  pos: cython.int[::1], node: cython.Py_ssize_t):
    i: cython.Py_ssize_t = pos[node]
    if i >= 0:
        _heap_sift_up(T, heap, pos, i)


# ---------------------------------------------------------------------------
# cubic Hermite interpolation along the update base
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _base_hermite(lam: cython.double, T1: cython.double, T2: cython.double,
                  d1: cython.double, d2: cython.double,
                  out: cython.double[::1]) -> cython.double:
    """Value, d/dlam, d2/dlam2 of the Hermite cubic through the base jets.

    d1, d2 are derivatives of T along the chord x2 - x1 (not unit length),
    i.e. g_i . (x2 - x1).  Writes dp, ddp into out[0:2]; returns p.
    """
    l2: cython.double = lam * lam
    l3: cython.double = l2 * lam
    p: cython.double = (2.0 * l3 - 3.0 * l2 + 1.0) * T1 + (-2.0 * l3 + 3.0 * l2) * T2 \
        + (l3 - 2.0 * l2 + lam) * d1 + (l3 - l2) * d2
    out[0] = (6.0 * l2 - 6.0 * lam) * (T1 - T2) + (3.0 * l2 - 4.0 * lam + 1.0) * d1 \
        + (3.0 * l2 - 2.0 * lam) * d2
    out[1] = (12.0 * lam - 6.0) * (T1 - T2) + (6.0 * lam - 4.0) * d1 + (6.0 * lam - 2.0) * d2
    return p


@cython.ccall
def hermite_base_eval(lam: cython.double, T1: cython.double, T2: cython.double,
                      d1: cython.double, d2: cython.double):
    """(value, d/dlam, d2/dlam2) of the base interpolant at lam."""
    l2 = lam * lam
    l3 = l2 * lam
    p = (2.0 * l3 - 3.0 * l2 + 1.0) * T1 + (-2.0 * l3 + 3.0 * l2) * T2 \
        + (l3 - 2.0 * l2 + lam) * d1 + (l3 - l2) * d2
    dp = (6.0 * l2 - 6.0 * lam) * (T1 - T2) + (3.0 * l2 - 4.0 * lam + 1.0) * d1 \
        + (3.0 * l2 - 2.0 * lam) * d2
    ddp = (12.0 * lam - 6.0) * (T1 - T2) + (6.0 * lam - 4.0) * d1 + (6.0 * lam - 2.0) * d2
    return p, dp, ddp


# ---------------------------------------------------------------------------
# bicubic cell primitives
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _coef_jet(co: cython.double[::1], u: cython.double, v: cython.double,
              h: cython.double, out: cython.double[::1]):
    """Value, physical gradient and Hessian of a bicubic at local (u, v)."""
    v2: cython.double = v * v
    v3: cython.double = v2 * v
    u2: cython.double = u * u
    u3: cython.double = u2 * u
    # per-u-power sums over v powers
    s0: cython.double = co[0] + co[1] * v + co[2] * v2 + co[3] * v3
    s1: cython.double = co[4] + co[5] * v + co[6] * v2 + co[7] * v3
    s2: cython.double = co[8] + co[9] * v + co[10] * v2 + co[11] * v3
    s3: cython.double = co[12] + co[13] * v + co[14] * v2 + co[15] * v3
    r0: cython.double = co[1] + 2.0 * co[2] * v + 3.0 * co[3] * v2
    r1: cython.double = co[5] + 2.0 * co[6] * v + 3.0 * co[7] * v2
    r2: cython.double = co[9] + 2.0 * co[10] * v + 3.0 * co[11] * v2
    r3: cython.double = co[13] + 2.0 * co[14] * v + 3.0 * co[15] * v2
    q0: cython.double = 2.0 * co[2] + 6.0 * co[3] * v
    q1: cython.double = 2.0 * co[6] + 6.0 * co[7] * v
    q2: cython.double = 2.0 * co[10] + 6.0 * co[11] * v
    q3: cython.double = 2.0 * co[14] + 6.0 * co[15] * v
    h2: cython.double = h * h
    out[0] = s0 + s1 * u + s2 * u2 + s3 * u3
    out[1] = (s1 + 2.0 * s2 * u + 3.0 * s3 * u2) / h
    out[2] = (r0 + r1 * u + r2 * u2 + r3 * u3) / h
    out[3] = (2.0 * s2 + 6.0 * s3 * u) / h2
    out[4] = (r1 + 2.0 * r2 * u + 3.0 * r3 * u2) / h2
    out[5] = (q0 + q1 * u + q2 * u2 + q3 * u3) / h2


@cython.ccall
@cython.boundscheck(False)
def eval_coeffs_jet(co: cython.double[::1], u: cython.double, v: cython.double,
                    h: cython.double, out: cython.double[::1]):
    """Public wrapper: bicubic (T, Tx, Ty, Txx, Txy, Tyy) into out[0:6]."""
    _coef_jet(co, u, v, h, out)


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _coeffs16(f0: cython.double, f1: cython.double, f2: cython.double,
              f3: cython.double,
              gx0: cython.double, gx1: cython.double, gx2: cython.double,
              gx3: cython.double,
              gy0: cython.double, gy1: cython.double, gy2: cython.double,
              gy3: cython.double,
              t0: cython.double, t1: cython.double, t2: cython.double,
              t3: cython.double,
              h: cython.double, out: cython.double[::1]):
    """Bicubic coefficients from corner jets.

    Corner order (0,0), (1,0), (0,1), (1,1); gx, gy, t are physical
    first/mixed partials, scaled internally to the unit cell.  The
    Hermite-to-monomial map (p0, p1, m0, m1) -> (p0, m0, -3p0+3p1-2m0-m1,
    2p0-2p1+m0+m1) is applied along u then along v.
    """
    h2: cython.double = h * h
    a0: cython.double = gx0 * h
    a1: cython.double = gx1 * h
    a2: cython.double = gx2 * h
    a3: cython.double = gx3 * h
    b0: cython.double = gy0 * h
    b1: cython.double = gy1 * h
    b2: cython.double = gy2 * h
    b3: cython.double = gy3 * h
    w0: cython.double = t0 * h2
    w1: cython.double = t1 * h2
    w2: cython.double = t2 * h2
    w3: cython.double = t3 * h2
    # u-direction transform per v-column: columns are
    #   l=0: (f0, f1, a0, a1)   values at v=0
    #   l=1: (f2, f3, a2, a3)   values at v=1
    #   l=2: (b0, b1, w0, w1)   d/dv at v=0
    #   l=3: (b2, b3, w2, w3)   d/dv at v=1
    c00: cython.double = f0
    c10: cython.double = a0
    c20: cython.double = -3.0 * f0 + 3.0 * f1 - 2.0 * a0 - a1
    c30: cython.double = 2.0 * f0 - 2.0 * f1 + a0 + a1
    c01: cython.double = f2
    c11: cython.double = a2
    c21: cython.double = -3.0 * f2 + 3.0 * f3 - 2.0 * a2 - a3
    c31: cython.double = 2.0 * f2 - 2.0 * f3 + a2 + a3
    c02: cython.double = b0
    c12: cython.double = w0
    c22: cython.double = -3.0 * b0 + 3.0 * b1 - 2.0 * w0 - w1
    c32: cython.double = 2.0 * b0 - 2.0 * b1 + w0 + w1
    c03: cython.double = b2
    c13: cython.double = w2
    c23: cython.double = -3.0 * b2 + 3.0 * b3 - 2.0 * w2 - w3
    c33: cython.double = 2.0 * b2 - 2.0 * b3 + w2 + w3
    # v-direction transform per u-power row (c_m0, c_m1, c_m2, c_m3)
    out[0] = c00
    out[1] = c02
    out[2] = -3.0 * c00 + 3.0 * c01 - 2.0 * c02 - c03
    out[3] = 2.0 * c00 - 2.0 * c01 + c02 + c03
    out[4] = c10
    out[5] = c12
    out[6] = -3.0 * c10 + 3.0 * c11 - 2.0 * c12 - c13
    out[7] = 2.0 * c10 - 2.0 * c11 + c12 + c13
    out[8] = c20
    out[9] = c22
    out[10] = -3.0 * c20 + 3.0 * c21 - 2.0 * c22 - c23
    out[11] = 2.0 * c20 - 2.0 * c21 + c22 + c23
    out[12] = c30
    out[13] = c32
    out[14] = -3.0 * c30 + 3.0 * c31 - 2.0 * c32 - c33
    out[15] = 2.0 * c30 - 2.0 * c31 + c32 + c33


@cython.ccall
@cython.boundscheck(False)
def build_coeffs(f: cython.double[::1], gx: cython.double[::1],
                 gy: cython.double[::1], txy: cython.double[::1],
                 h: cython.double, out: cython.double[::1]):
    """Bicubic coefficients from length-4 corner data arrays."""
    _coeffs16(f[0], f[1], f[2], f[3], gx[0], gx[1], gx[2], gx[3],
              gy[0], gy[1], gy[2], gy[3], txy[0], txy[1], txy[2], txy[3],
              h, out)


@cython.ccall
@cython.boundscheck(False)
def estimate_txy_corners(gx: cython.double[::1], gy: cython.double[::1],
                         h: cython.double, out: cython.double[::1]):
    """Corner mixed partials from corner gradients of one cell.

    Central differences at the edge midpoints followed by bilinear
    extrapolation (in the rotated frame of the midpoint diamond) back to
    the corners.  Corner order (0,0), (1,0), (0,1), (1,1).
    """
    mb: cython.double = (gy[1] - gy[0]) / h
    mt: cython.double = (gy[3] - gy[2]) / h
    ml: cython.double = (gx[2] - gx[0]) / h
    mr: cython.double = (gx[3] - gx[1]) / h
    out[0] = (3.0 * (mb + ml) - (mr + mt)) / 4.0
    out[1] = (3.0 * (mb + mr) - (ml + mt)) / 4.0
    out[2] = (3.0 * (ml + mt) - (mb + mr)) / 4.0
    out[3] = (3.0 * (mr + mt) - (mb + ml)) / 4.0


# ---------------------------------------------------------------------------
# kernel state
# ---------------------------------------------------------------------------

@cython.cclass
class KernelState:
    """Typed views over one march's arrays plus scratch buffers."""

    M: cython.Py_ssize_t
    h: cython.double
    xmin: cython.double
    ymin: cython.double
    kind: cython.int
    s0: cython.double
    vx: cython.double
    vy: cython.double
    variant: cython.int
    stencil: cython.int  # 4 or 8

    state: cython.int[::1]
    T: cython.double[::1]
    gx: cython.double[::1]
    gy: cython.double[::1]

    heap: cython.int[::1]
    hpos: cython.int[::1]
    hn: cython.longlong[::1]

    par1: cython.int[::1]
    par2: cython.int[::1]
    plam: cython.double[::1]
    pL: cython.double[::1]
    ptx: cython.double[::1]
    pty: cython.double[::1]

    has_cells: cython.int
    ccoef: cython.double[:, ::1]
    cvalid: cython.int[::1]
    txy_sum: cython.double[::1]
    txy_cnt: cython.int[::1]
    region: cython.int[::1]
    region_txy: cython.double[::1]

    stats: cython.longlong[::1]

    # disjoint scratch buffers (single-threaded per instance)
    sc: cython.double[::1]
    ob: cython.double[::1]
    rb: cython.double[::1]
    eb: cython.double[::1]
    cb: cython.double[::1]
    fb: cython.double[::1]

    def __init__(self, M, h, xmin, ymin, kind, s0, vx, vy, variant, stencil,
                 state, T, gx, gy, heap, hpos, hn,
                 par1, par2, plam, pL, ptx, pty,
                 has_cells, ccoef, cvalid, txy_sum, txy_cnt, region, region_txy,
                 stats, scratch):
        self.M = M
        self.h = h
        self.xmin = xmin
        self.ymin = ymin
        self.kind = kind
        self.s0 = s0
        self.vx = vx
        self.vy = vy
        self.variant = variant
        self.stencil = stencil
        self.state = state
        self.T = T
        self.gx = gx
        self.gy = gy
        self.heap = heap
        self.hpos = hpos
        self.hn = hn
        self.par1 = par1
        self.par2 = par2
        self.plam = plam
        self.pL = pL
        self.ptx = ptx
        self.pty = pty
        self.has_cells = has_cells
        self.ccoef = ccoef
        self.cvalid = cvalid
        self.txy_sum = txy_sum
        self.txy_cnt = txy_cnt
        self.region = region
        self.region_txy = region_txy
        self.stats = stats
        self.sc = scratch[0:4]
        self.ob = scratch[4:20]
        self.rb = scratch[20:36]
        self.eb = scratch[36:44]
        self.cb = scratch[44:50]
        self.fb = scratch[50:56]


# ---------------------------------------------------------------------------
# triangle update: fused cost + analytic gradient for every variant
# ---------------------------------------------------------------------------

# buffer layouts:
# cost out:  [0:3] grad, [3] tlx, [4] tly, [5] thx, [6] thy, [7] L, [8] fail
# solve res: [0] F, [1] lam, [2] tlx, [3] tly, [4] thx, [5] thy, [6] L,
#            [7] iters, [8] status (0 ok, 1 no-conv, 2 reject, 3 boundary)


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _tri_cost(variant: cython.int, kind: cython.int, s0m: cython.double,
              vx: cython.double, vy: cython.double,
              x1x: cython.double, x1y: cython.double,
              x2x: cython.double, x2y: cython.double,
              xhx: cython.double, xhy: cython.double, sh: cython.double,
              T1: cython.double, T2: cython.double,
              d1: cython.double, d2: cython.double,
              lb: cython.double, tvx: cython.double, tvy: cython.double,
              cc: cython.double[::1], ccx: cython.double, ccy: cython.double,
              ch: cython.double,
              u0: cython.double, u1: cython.double, u2: cython.double,
              want_grad: cython.int,
              sc: cython.double[::1], cjb: cython.double[::1],
              hb: cython.double[::1], out: cython.double[::1]) -> cython.double:
    lam: cython.double = u0
    dx: cython.double = x2x - x1x
    dy: cython.double = x2y - x1y
    xlx: cython.double = x1x + lam * dx
    xly: cython.double = x1y + lam * dy
    ex: cython.double = xhx - xlx
    ey: cython.double = xhy - xly
    L: cython.double = sqrt(ex * ex + ey * ey)
    out[8] = 0.0
    if L < 1e-300:
        out[8] = 3.0
        return INF
    elx: cython.double = ex / L
    ely: cython.double = ey / L
    qx: cython.double = -ely
    qy: cython.double = elx
    out[7] = L

    p: cython.double = _base_hermite(lam, T1, T2, d1, d2, hb)
    dp: cython.double = hb[0]
    ddp: cython.double = hb[1]

    s0v: cython.double = _s_grad(kind, s0m, vx, vy, xlx, xly, sc)
    gs0x: cython.double = sc[0]
    gs0y: cython.double = sc[1]

    midx: cython.double = 0.5 * (xlx + xhx)
    midy: cython.double = 0.5 * (xly + xhy)

    # geometry derivatives in lam (cheap, always computed)
    edot: cython.double = elx * dx + ely * dy
    dL: cython.double = -edot
    delx: cython.double = (-dx + elx * edot) / L
    dely: cython.double = (-dy + ely * edot) / L
    dqx: cython.double = -dely
    dqy: cython.double = delx
    ds0: cython.double = gs0x * dx + gs0y * dy

    tlx: cython.double = 0.0
    tly: cython.double = 0.0
    thx: cython.double = 0.0
    thy: cython.double = 0.0
    dtlx: cython.double = 0.0
    dtly: cython.double = 0.0
    F: cython.double
    fx: cython.double
    fy: cython.double
    sm: cython.double
    gsmx: cython.double
    gsmy: cython.double
    nrm: cython.double
    vx_: cython.double
    vy_: cython.double
    dfx: cython.double
    dfy: cython.double
    dvx: cython.double
    dvy: cython.double
    ax: cython.double
    ay: cython.double

    if variant == V_JMM2 or variant == V_JMM4:
        if variant == V_JMM4:
            # base tangent from the upwind bicubic cell's gradient
            _coef_jet(cc, (xlx - ccx) / ch, (xly - ccy) / ch, ch, cjb)
            gxl: cython.double = cjb[1]
            gyl: cython.double = cjb[2]
            gn: cython.double = sqrt(gxl * gxl + gyl * gyl)
            if gn < 1e-14:
                out[8] = 2.0
                return INF
            tlx = gxl / gn
            tly = gyl / gn
            if want_grad != 0:
                dgx: cython.double = cjb[3] * dx + cjb[4] * dy
                dgy: cython.double = cjb[4] * dx + cjb[5] * dy
                dot_: cython.double = tlx * dgx + tly * dgy
                dtlx = (dgx - tlx * dot_) / gn
                dtly = (dgy - tly * dot_) / gn
        else:
            # recover the base tangent from the eikonal equation
            tang: cython.double = dp / lb
            disc: cython.double = s0v * s0v - tang * tang
            if disc <= 0.0:
                out[8] = 2.0
                return INF
            dvn: cython.double = sqrt(disc)
            vpx: cython.double = -tvy
            vpy: cython.double = tvx
            if vpx * elx + vpy * ely < 0.0:
                vpx = -vpx
                vpy = -vpy
            gxl2: cython.double = dvn * vpx + tang * tvx
            gyl2: cython.double = dvn * vpy + tang * tvy
            tlx = gxl2 / s0v
            tly = gyl2 / s0v
            if want_grad != 0:
                dtang: cython.double = ddp / lb
                ddvn: cython.double = (s0v * ds0 - tang * dtang) / dvn
                dgx2: cython.double = ddvn * vpx + dtang * tvx
                dgy2: cython.double = ddvn * vpy + dtang * tvy
                dtlx = (dgx2 * s0v - gxl2 * ds0) / (s0v * s0v)
                dtly = (dgy2 * s0v - gyl2 * ds0) / (s0v * s0v)

    if variant == V_JMM1 or variant == V_JMM2 or variant == V_JMM4:
        if variant == V_JMM1:
            tlx = cos(u1)
            tly = sin(u1)
            thx = cos(u2)
            thy = sin(u2)
        else:
            thx = cos(u1)
            thy = sin(u1)
        fx = midx + L / 8.0 * (tlx - thx)
        fy = midy + L / 8.0 * (tly - thy)
        vx_ = 1.5 * elx - 0.25 * (tlx + thx)
        vy_ = 1.5 * ely - 0.25 * (tly + thy)
        nrm = sqrt(vx_ * vx_ + vy_ * vy_)
        sm = _s_grad(kind, s0m, vx, vy, fx, fy, sc)
        gsmx = sc[0]
        gsmy = sc[1]
        F = p + L / 6.0 * (s0v + 4.0 * sm * nrm + sh)
        if want_grad != 0:
            dfx = 0.5 * dx + dL / 8.0 * (tlx - thx)
            dfy = 0.5 * dy + dL / 8.0 * (tly - thy)
            dvx = 1.5 * delx
            dvy = 1.5 * dely
            if variant != V_JMM1:
                dfx += L / 8.0 * dtlx
                dfy += L / 8.0 * dtly
                dvx -= 0.25 * dtlx
                dvy -= 0.25 * dtly
            out[0] = dp + dL / 6.0 * (s0v + 4.0 * sm * nrm + sh) + L / 6.0 * (
                ds0 + 4.0 * ((gsmx * dfx + gsmy * dfy) * nrm
                             + sm * (vx_ * dvx + vy_ * dvy) / nrm))
            if variant == V_JMM1:
                ax = -tly
                ay = tlx
                dfx = L / 8.0 * ax
                dfy = L / 8.0 * ay
                dvx = -0.25 * ax
                dvy = -0.25 * ay
                out[1] = L / 6.0 * 4.0 * ((gsmx * dfx + gsmy * dfy) * nrm
                                          + sm * (vx_ * dvx + vy_ * dvy) / nrm)
                ax = -thy
                ay = thx
                dfx = -L / 8.0 * ax
                dfy = -L / 8.0 * ay
                dvx = -0.25 * ax
                dvy = -0.25 * ay
                out[2] = L / 6.0 * 4.0 * ((gsmx * dfx + gsmy * dfy) * nrm
                                          + sm * (vx_ * dvx + vy_ * dvy) / nrm)
            else:
                ax = -thy
                ay = thx
                dfx = -L / 8.0 * ax
                dfy = -L / 8.0 * ay
                dvx = -0.25 * ax
                dvy = -0.25 * ay
                out[1] = L / 6.0 * 4.0 * ((gsmx * dfx + gsmy * dfy) * nrm
                                          + sm * (vx_ * dvx + vy_ * dvy) / nrm)
                out[2] = 0.0
    elif variant == V_JMM3:
        thx = cos(u1)
        thy = sin(u1)
        dot: cython.double = elx * thx + ely * thy
        fx = midx - L / 4.0 * (thx - elx * dot)
        fy = midy - L / 4.0 * (thy - ely * dot)
        sm = _s_grad(kind, s0m, vx, vy, fx, fy, sc)
        gsmx = sc[0]
        gsmy = sc[1]
        F = p + L / 6.0 * (s0v + 2.0 * (3.0 - dot) * sm + sh)
        tlx = 2.0 * elx * dot - thx
        tly = 2.0 * ely * dot - thy
        if want_grad != 0:
            ddot: cython.double = delx * thx + dely * thy
            dfx = 0.5 * dx - dL / 4.0 * (thx - elx * dot) \
                + L / 4.0 * (delx * dot + elx * ddot)
            dfy = 0.5 * dy - dL / 4.0 * (thy - ely * dot) \
                + L / 4.0 * (dely * dot + ely * ddot)
            out[0] = dp + dL / 6.0 * (s0v + 2.0 * (3.0 - dot) * sm + sh) + L / 6.0 * (
                ds0 - 2.0 * ddot * sm + 2.0 * (3.0 - dot) * (gsmx * dfx + gsmy * dfy))
            ax = -thy
            ay = thx
            ddot = elx * ax + ely * ay
            dfx = -L / 4.0 * (ax - elx * ddot)
            dfy = -L / 4.0 * (ay - ely * ddot)
            out[1] = L / 6.0 * (-2.0 * ddot * sm
                                + 2.0 * (3.0 - dot) * (gsmx * dfx + gsmy * dfy))
            out[2] = 0.0
    else:
        # graph-of-function forms
        b0: cython.double
        b1: cython.double
        db0: cython.double = 0.0
        if variant == V_JMM1G:
            b0 = u1
            b1 = u2
        elif variant == V_JMM3G:
            b1 = u1
            b0 = -b1
        else:  # V_JMM2G: base slope from the recovered tangent
            b1 = u1
            tang2: cython.double = dp / lb
            disc2: cython.double = s0v * s0v - tang2 * tang2
            if disc2 <= 0.0:
                out[8] = 2.0
                return INF
            dvn2: cython.double = sqrt(disc2)
            wpx: cython.double = -tvy
            wpy: cython.double = tvx
            if wpx * elx + wpy * ely < 0.0:
                wpx = -wpx
                wpy = -wpy
            gxl3: cython.double = dvn2 * wpx + tang2 * tvx
            gyl3: cython.double = dvn2 * wpy + tang2 * tvy
            den: cython.double = elx * gxl3 + ely * gyl3
            if den <= 1e-14 * s0v:
                out[8] = 2.0
                return INF
            b0 = (qx * gxl3 + qy * gyl3) / den
            tlx = gxl3 / s0v
            tly = gyl3 / s0v
            if want_grad != 0:
                dtang2: cython.double = ddp / lb
                ddvn2: cython.double = (s0v * ds0 - tang2 * dtang2) / dvn2
                dgx3: cython.double = ddvn2 * wpx + dtang2 * tvx
                dgy3: cython.double = ddvn2 * wpy + dtang2 * tvy
                dnum: cython.double = dqx * gxl3 + qx * dgx3 + dqy * gyl3 + qy * dgy3
                dden: cython.double = delx * gxl3 + elx * dgx3 + dely * gyl3 + ely * dgy3
                db0 = (dnum * den - (qx * gxl3 + qy * gyl3) * dden) / (den * den)

        w0: cython.double = sqrt(1.0 + b0 * b0)
        w1: cython.double = sqrt(1.0 + b1 * b1)
        mb: cython.double = 0.25 * (b0 + b1)
        wm: cython.double = sqrt(1.0 + mb * mb)
        zh: cython.double = (b0 - b1) * L / 8.0
        fx = midx + qx * zh
        fy = midy + qy * zh
        sm = _s_grad(kind, s0m, vx, vy, fx, fy, sc)
        gsmx = sc[0]
        gsmy = sc[1]
        if variant == V_JMM3G:
            F = p + L / 6.0 * ((s0v + sh) * w0 + 4.0 * sm)
        else:
            F = p + L / 6.0 * (s0v * w0 + 4.0 * sm * wm + sh * w1)
        if variant != V_JMM2G:
            tlx = (elx + b0 * qx) / w0
            tly = (ely + b0 * qy) / w0
        thx = (elx + b1 * qx) / w1
        thy = (ely + b1 * qy) / w1
        if want_grad != 0:
            dzh: cython.double = (b0 - b1) * dL / 8.0 + db0 * L / 8.0
            dfx = 0.5 * dx + dqx * zh + qx * dzh
            dfy = 0.5 * dy + dqy * zh + qy * dzh
            gdf: cython.double = gsmx * dfx + gsmy * dfy
            if variant == V_JMM3G:
                out[0] = dp + dL / 6.0 * ((s0v + sh) * w0 + 4.0 * sm) \
                    + L / 6.0 * (ds0 * w0 + 4.0 * gdf)
                dfx = -qx * L / 4.0
                dfy = -qy * L / 4.0
                out[1] = L / 6.0 * ((s0v + sh) * b1 / w0
                                    + 4.0 * (gsmx * dfx + gsmy * dfy))
                out[2] = 0.0
            else:
                out[0] = dp + dL / 6.0 * (s0v * w0 + 4.0 * sm * wm + sh * w1) \
                    + L / 6.0 * (ds0 * w0 + s0v * (b0 / w0) * db0
                                 + 4.0 * (gdf * wm + sm * (mb / wm) * 0.25 * db0))
                if variant == V_JMM1G:
                    dfx = qx * L / 8.0
                    dfy = qy * L / 8.0
                    out[1] = L / 6.0 * (s0v * b0 / w0
                                        + 4.0 * ((gsmx * dfx + gsmy * dfy) * wm
                                                 + sm * mb / (4.0 * wm)))
                    dfx = -qx * L / 8.0
                    dfy = -qy * L / 8.0
                    out[2] = L / 6.0 * (4.0 * ((gsmx * dfx + gsmy * dfy) * wm
                                               + sm * mb / (4.0 * wm))
                                        + sh * b1 / w1)
                else:  # V_JMM2G
                    dfx = -qx * L / 8.0
                    dfy = -qy * L / 8.0
                    out[1] = L / 6.0 * (4.0 * ((gsmx * dfx + gsmy * dfy) * wm
                                               + sm * mb / (4.0 * wm))
                                        + sh * b1 / w1)
                    out[2] = 0.0

    out[3] = tlx
    out[4] = tly
    out[5] = thx
    out[6] = thy
    return F


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _tri_solve(ks: KernelState, variant: cython.int,
               x1x: cython.double, x1y: cython.double,
               x2x: cython.double, x2y: cython.double,
               xhx: cython.double, xhy: cython.double, sh: cython.double,
               T1: cython.double, T2: cython.double,
               g1x: cython.double, g1y: cython.double,
               g2x: cython.double, g2y: cython.double,
               cc: cython.double[::1], ccx: cython.double, ccy: cython.double,
               ch: cython.double,
               lam0: cython.double, th0: cython.double,
               res: cython.double[::1]) -> cython.int:
    """Damped projected Newton on the triangle cost.  Result into res."""
    dx: cython.double = x2x - x1x
    dy: cython.double = x2y - x1y
    lb: cython.double = sqrt(dx * dx + dy * dy)
    d1: cython.double = g1x * dx + g1y * dy
    d2: cython.double = g2x * dx + g2y * dy
    tvx: cython.double = dx / lb
    tvy: cython.double = dy / lb

    nv: cython.int = 3 if (variant == V_JMM1 or variant == V_JMM1G) else 2
    u0: cython.double = lam0
    u1: cython.double = 0.0
    u2: cython.double = 0.0
    if variant == V_JMM1:
        u1 = th0
        u2 = th0
    elif variant == V_JMM2 or variant == V_JMM3 or variant == V_JMM4:
        u1 = th0
    # graph variants start from zero chord-orthogonal slopes

    ob: cython.double[::1] = ks.ob
    sc: cython.double[::1] = ks.sc
    cjb: cython.double[::1] = ks.cb
    hb: cython.double[::1] = ks.fb

    g0: cython.double = 0.0
    g1: cython.double = 0.0
    g2: cython.double = 0.0
    H00: cython.double = 0.0
    H01: cython.double = 0.0
    H02: cython.double = 0.0
    H11: cython.double = 0.0
    H12: cython.double = 0.0
    H22: cython.double = 0.0
    F: cython.double
    Fn: cython.double = 0.0
    it: cython.int = 0
    converged: cython.int = 0
    restarted: cython.int = 0
    slow: cython.int = 0
    n0: cython.double
    n1: cython.double
    n2: cython.double
    a: cython.int
    b: cython.int
    ks.stats[0] += 1

    F = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y, x2x, x2y,
                  xhx, xhy, sh, T1, T2, d1, d2, lb, tvx, tvy,
                  cc, ccx, ccy, ch, u0, u1, u2, 1, sc, cjb, hb, ob)
    if ob[8] != 0.0:
        res[8] = ob[8]
        ks.stats[4] += 1
        return 1

    while it < _MAXIT:
        it += 1
        g0 = ob[0]
        g1 = ob[1]
        g2 = ob[2]
        L: cython.double = ob[7]
        # projected gradient: an active lam bound with an inward-ascent
        # component does not count against convergence
        pg0: cython.double = g0
        if (u0 <= 0.0 and g0 > 0.0) or (u0 >= 1.0 and g0 < 0.0):
            pg0 = 0.0
        gn: cython.double = sqrt(pg0 * pg0 + g1 * g1 + g2 * g2)
        if gn < _GRAD_TOL:
            converged = 1
            break
        # central-difference Hessian of the analytic gradient; accurate
        # enough that Newton contracts to the step tolerance
        fd: cython.double = 3e-6
        for a in range(nv):
            lo0: cython.double = u0
            lo1: cython.double = u1
            lo2: cython.double = u2
            hi0: cython.double = u0
            hi1: cython.double = u1
            hi2: cython.double = u2
            if a == 0:
                # keep both samples inside the lam box
                lo0 = u0 - fd
                hi0 = u0 + fd
                if lo0 < 0.0:
                    lo0 = u0
                    hi0 = u0 + 2.0 * fd
                elif hi0 > 1.0:
                    hi0 = u0
                    lo0 = u0 - 2.0 * fd
            elif a == 1:
                lo1 = u1 - fd
                hi1 = u1 + fd
            else:
                lo2 = u2 - fd
                hi2 = u2 + fd
            _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y, x2x, x2y,
                      xhx, xhy, sh, T1, T2, d1, d2, lb, tvx, tvy,
                      cc, ccx, ccy, ch, hi0, hi1, hi2, 1, sc, cjb, hb, ob)
            if ob[8] != 0.0:
                ob[0] = g0
                ob[1] = g1
                ob[2] = g2
            ha0: cython.double = ob[0]
            ha1: cython.double = ob[1]
            ha2: cython.double = ob[2]
            _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y, x2x, x2y,
                      xhx, xhy, sh, T1, T2, d1, d2, lb, tvx, tvy,
                      cc, ccx, ccy, ch, lo0, lo1, lo2, 1, sc, cjb, hb, ob)
            if ob[8] != 0.0:
                ob[0] = g0
                ob[1] = g1
                ob[2] = g2
            den: cython.double = (hi0 - lo0) + (hi1 - lo1) + (hi2 - lo2)
            c0: cython.double = (ha0 - ob[0]) / den
            c1: cython.double = (ha1 - ob[1]) / den
            c2: cython.double = (ha2 - ob[2]) / den
            if a == 0:
                H00 = c0
                H01 = c1
                H02 = c2
            elif a == 1:
                H01 = 0.5 * (H01 + c0)
                H11 = c1
                H12 = c2
            else:
                H02 = 0.5 * (H02 + c0)
                H12 = 0.5 * (H12 + c1)
                H22 = c2
        # with the lam bound active, Newton runs on the reduced system
        if pg0 == 0.0 and g0 != 0.0:
            g0 = 0.0
            H01 = 0.0
            H02 = 0.0
            H00 = 1.0
        # regularize to positive definite, then solve H d = -g in closed form
        scale: cython.double = _fabs(H00) + _fabs(H11) + _fabs(H22) + 1e-30
        mu: cython.double = 0.0
        d0: cython.double = 0.0
        d1_: cython.double = 0.0
        d2_: cython.double = 0.0
        tries: cython.int = 0
        while tries < 60:
            tries += 1
            a00: cython.double = H00 + mu
            a11: cython.double = H11 + mu
            a22: cython.double = H22 + mu
            ok: cython.int = 0
            if nv == 2:
                det: cython.double = a00 * a11 - H01 * H01
                if a00 > 0.0 and det > 0.0:
                    d0 = (-g0 * a11 + g1 * H01) / det
                    d1_ = (g0 * H01 - g1 * a00) / det
                    ok = 1
            else:
                m2: cython.double = a00 * a11 - H01 * H01
                det3: cython.double = a00 * (a11 * a22 - H12 * H12) \
                    - H01 * (H01 * a22 - H12 * H02) + H02 * (H01 * H12 - a11 * H02)
                if a00 > 0.0 and m2 > 0.0 and det3 > 0.0:
                    d0 = (-g0 * (a11 * a22 - H12 * H12)
                          + g1 * (H01 * a22 - H02 * H12)
                          - g2 * (H01 * H12 - H02 * a11)) / det3
                    d1_ = (g0 * (H01 * a22 - H12 * H02)
                           - g1 * (a00 * a22 - H02 * H02)
                           + g2 * (a00 * H12 - H02 * H01)) / det3
                    d2_ = (-g0 * (H01 * H12 - a11 * H02)
                           + g1 * (a00 * H12 - H01 * H02)
                           - g2 * (a00 * a11 - H01 * H01)) / det3
                    ok = 1
            if ok == 1:
                break
            mu = 1e-10 * scale if mu == 0.0 else 4.0 * mu
        # full projected step; if its predicted descent is below the
        # resolution of F we are at the minimum to working precision
        n0 = u0 + d0
        if n0 < 0.0:
            n0 = 0.0
        elif n0 > 1.0:
            n0 = 1.0
        n1 = u1 + d1_
        n2 = u2 + d2_
        predf: cython.double = g0 * (n0 - u0) + g1 * (n1 - u1) + g2 * (n2 - u2)
        if predf >= -1e-15 * (1.0 + _fabs(F)):
            Fn = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y,
                           x2x, x2y, xhx, xhy, sh, T1, T2, d1, d2, lb, tvx, tvy,
                           cc, ccx, ccy, ch, n0, n1, n2, 1, sc, cjb, hb, ob)
            if ob[8] == 0.0 and Fn <= F + 1e-13 * (1.0 + _fabs(F)):
                u0 = n0
                u1 = n1
                u2 = n2
                F = Fn
            else:
                # refresh data at the unmoved point
                F = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y,
                              x2x, x2y, xhx, xhy, sh, T1, T2, d1, d2, lb,
                              tvx, tvy, cc, ccx, ccy, ch, u0, u1, u2, 1,
                              sc, cjb, hb, ob)
            converged = 1
            if restarted == 0 and (u0 <= 0.0 or u0 >= 1.0):
                if (u0 <= 0.0 and ob[0] < -1e-15) or (u0 >= 1.0 and ob[0] > 1e-15):
                    restarted = 1
                    converged = 0
                    slow = 0
                    u0 = 0.5
                    F = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy,
                                  x1x, x1y, x2x, x2y, xhx, xhy, sh, T1, T2,
                                  d1, d2, lb, tvx, tvy, cc, ccx, ccy, ch,
                                  u0, u1, u2, 1, sc, cjb, hb, ob)
                    if ob[8] != 0.0:
                        res[8] = ob[8]
                        ks.stats[4] += 1
                        return 1
                    continue
            break
        # backtracking with projection of lam onto [0, 1]
        t: cython.double = 1.0
        accepted: cython.int = 0
        for b in range(30):
            n0 = u0 + t * d0
            if n0 < 0.0:
                n0 = 0.0
            elif n0 > 1.0:
                n0 = 1.0
            n1 = u1 + t * d1_
            n2 = u2 + t * d2_
            Fn = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y,
                           x2x, x2y, xhx, xhy, sh, T1, T2, d1, d2, lb, tvx, tvy,
                           cc, ccx, ccy, ch, n0, n1, n2, 0, sc, cjb, hb, ob)
            if ob[8] == 0.0:
                pred: cython.double = g0 * (n0 - u0) + g1 * (n1 - u1) + g2 * (n2 - u2)
                if Fn <= F + 1e-4 * pred:
                    accepted = 1
                    break
            t *= 0.5
        if accepted == 0:
            # no numerical descent left: at the evaluation noise floor this
            # is convergence, at a large gradient it is a genuine failure
            converged = 1 if gn < 1e-8 * (1.0 + _fabs(F)) else 0
            break
        step: cython.double = sqrt((n0 - u0) ** 2 + (n1 - u1) ** 2 + (n2 - u2) ** 2)
        u0 = n0
        u1 = n1
        u2 = n2
        F = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y, x2x, x2y,
                      xhx, xhy, sh, T1, T2, d1, d2, lb, tvx, tvy,
                      cc, ccx, ccy, ch, u0, u1, u2, 1, sc, cjb, hb, ob)
        if ob[8] != 0.0:
            res[8] = ob[8]
            ks.stats[4] += 1
            return 1
        tol: cython.double = _STEP_TOL * (L if L > 1.0 else 1.0)
        if step < 32.0 * tol:
            slow += 1
        else:
            slow = 0
        # several consecutive near-tolerance steps: the iterate is pinned at
        # the gradient noise floor just above the step tolerance
        if step < tol or slow >= 4:
            converged = 1
            # KKT at the lam box: re-run once from the interior when the
            # gradient points inward at lam in {0, 1}
            if restarted == 0 and (u0 <= 0.0 or u0 >= 1.0):
                inward: cython.int = 1 if ((u0 <= 0.0 and ob[0] < -1e-15)
                                           or (u0 >= 1.0 and ob[0] > 1e-15)) else 0
                if inward == 1:
                    restarted = 1
                    converged = 0
                    slow = 0
                    u0 = 0.5
                    F = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy,
                                  x1x, x1y, x2x, x2y, xhx, xhy, sh, T1, T2,
                                  d1, d2, lb, tvx, tvy, cc, ccx, ccy, ch,
                                  u0, u1, u2, 1, sc, cjb, hb, ob)
                    if ob[8] != 0.0:
                        res[8] = ob[8]
                        ks.stats[4] += 1
                        return 1
                    continue
            break

    ks.stats[3] += it
    if converged == 0:
        res[8] = 1.0
        return 1
    ks.stats[1] += 1
    if it <= 10:
        ks.stats[2] += 1

    res[0] = F
    res[1] = u0
    res[2] = ob[3]
    res[3] = ob[4]
    res[4] = ob[5]
    res[5] = ob[6]
    res[6] = ob[7]
    res[7] = it
    if u0 <= 1e-9 or u0 >= 1.0 - 1e-9:
        ks.stats[6] += 1
        res[8] = 3.0
    else:
        res[8] = 0.0
    return 0


# ---------------------------------------------------------------------------
# line / first-order updates
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.exceptval(check=False)
def _line_value(kind: cython.int, s0: cython.double, vx: cython.double,
                vy: cython.double, x1x: cython.double, x1y: cython.double,
                xhx: cython.double, xhy: cython.double, T1: cython.double,
                sh: cython.double) -> cython.double:
    """Simpson one-point update along the straight segment."""
    L: cython.double = sqrt((xhx - x1x) ** 2 + (xhy - x1y) ** 2)
    s1: cython.double = _s_val(kind, s0, vx, vy, x1x, x1y)
    sm: cython.double = _s_val(kind, s0, vx, vy, 0.5 * (x1x + xhx), 0.5 * (x1y + xhy))
    return T1 + L / 6.0 * (s1 + 4.0 * sm + sh)


@cython.ccall
def line_value(kind: cython.int, s0: cython.double, vx: cython.double,
               vy: cython.double, x1x: cython.double, x1y: cython.double,
               xhx: cython.double, xhy: cython.double, T1: cython.double) -> cython.double:
    sh: cython.double = _s_val(kind, s0, vx, vy, xhx, xhy)
    return _line_value(kind, s0, vx, vy, x1x, x1y, xhx, xhy, T1, sh)


# ---------------------------------------------------------------------------
# per-node updates
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _upwind_cell(ks: KernelState, i: cython.Py_ssize_t, j: cython.Py_ssize_t,
                 k1: cython.int, k2: cython.int) -> cython.Py_ssize_t:
    """Flat id of the valid cell on the far side of the base edge, or -1."""
    M: cython.Py_ssize_t = ks.M
    di1: cython.int = _ring_di(k1)
    dj1: cython.int = _ring_dj(k1)
    di2: cython.int = _ring_di(k2)
    dj2: cython.int = _ring_dj(k2)
    ci: cython.Py_ssize_t
    cj: cython.Py_ssize_t
    if di1 == di2:
        ic: cython.Py_ssize_t = i + di1
        jm: cython.Py_ssize_t = j + (dj1 if dj1 < dj2 else dj2)
        ci = ic if di1 > 0 else ic - 1
        cj = jm
    elif dj1 == dj2:
        jc: cython.Py_ssize_t = j + dj1
        im: cython.Py_ssize_t = i + (di1 if di1 < di2 else di2)
        ci = im
        cj = jc if dj1 > 0 else jc - 1
    else:
        return -1
    if ci < 0 or cj < 0 or ci >= M - 1 or cj >= M - 1:
        return -1
    cid: cython.Py_ssize_t = ci * (M - 1) + cj
    if ks.cvalid[cid] == 0:
        return -1
    return cid


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _bottom_up(ks: KernelState, node: cython.Py_ssize_t) -> cython.double:
    """Hierarchical line-then-triangle update; writes the jet on improvement."""
    M: cython.Py_ssize_t = ks.M
    i: cython.Py_ssize_t = node // M
    j: cython.Py_ssize_t = node % M
    xh: cython.double = ks.xmin + i * ks.h
    yh: cython.double = ks.ymin + j * ks.h
    sh: cython.double = _s_val(ks.kind, ks.s0, ks.vx, ks.vy, xh, yh)
    step: cython.int = 1 if ks.stencil == 8 else 2
    k: cython.int
    best: cython.double = INF
    bestk: cython.int = -1
    k = 0
    while k < 8:
        ni: cython.Py_ssize_t = i + _ring_di(k)
        nj: cython.Py_ssize_t = j + _ring_dj(k)
        if 0 <= ni < M and 0 <= nj < M:
            nn: cython.Py_ssize_t = ni * M + nj
            if ks.state[nn] == VALID:
                val: cython.double = _line_value(
                    ks.kind, ks.s0, ks.vx, ks.vy,
                    ks.xmin + ni * ks.h, ks.ymin + nj * ks.h, xh, yh,
                    ks.T[nn], sh)
                if val < best:
                    best = val
                    bestk = k
        k += step
    if bestk < 0:
        return INF

    # best line candidate seeds the triangle pass
    bi: cython.Py_ssize_t = i + _ring_di(bestk)
    bj: cython.Py_ssize_t = j + _ring_dj(bestk)
    n1: cython.Py_ssize_t = bi * M + bj
    x1x: cython.double = ks.xmin + bi * ks.h
    x1y: cython.double = ks.ymin + bj * ks.h
    Lx: cython.double = xh - x1x
    Ly: cython.double = yh - x1y
    Ln: cython.double = sqrt(Lx * Lx + Ly * Ly)
    elx: cython.double = Lx / Ln
    ely: cython.double = Ly / Ln
    th0: cython.double = atan2(ely, elx)
    cand: cython.double = best
    c_par1: cython.Py_ssize_t = n1
    c_par2: cython.Py_ssize_t = -1
    c_lam: cython.double = 0.0
    c_L: cython.double = Ln
    c_tlx: cython.double = elx
    c_tly: cython.double = ely
    c_thx: cython.double = elx
    c_thy: cython.double = ely

    # the (at most two) triangle updates whose base contains the line winner
    res: cython.double[::1] = ks.rb
    sgn: cython.int
    for sgn in range(2):
        k2: cython.int = (bestk + step) % 8 if sgn == 0 else (bestk - step + 8) % 8
        ni2: cython.Py_ssize_t = i + _ring_di(k2)
        nj2: cython.Py_ssize_t = j + _ring_dj(k2)
        if not (0 <= ni2 < M and 0 <= nj2 < M):
            continue
        n2: cython.Py_ssize_t = ni2 * M + nj2
        if ks.state[n2] != VALID:
            continue
        x2x: cython.double = ks.xmin + ni2 * ks.h
        x2y: cython.double = ks.ymin + nj2 * ks.h
        variant: cython.int = ks.variant
        cc: cython.double[::1] = ks.ccoef[0]
        ccx: cython.double = 0.0
        ccy: cython.double = 0.0
        if variant == V_JMM4:
            cid: cython.Py_ssize_t = _upwind_cell(ks, i, j, bestk, k2)
            if cid < 0:
                variant = V_JMM2
            else:
                cc = ks.ccoef[cid]
                ccx = ks.xmin + (cid // (M - 1)) * ks.h
                ccy = ks.ymin + (cid % (M - 1)) * ks.h
        fail: cython.int = _tri_solve(
            ks, variant, x1x, x1y, x2x, x2y, xh, yh, sh,
            ks.T[n1], ks.T[n2], ks.gx[n1], ks.gy[n1], ks.gx[n2], ks.gy[n2],
            cc, ccx, ccy, ks.h, 0.25, th0, res)
        if fail != 0 or res[8] != 0.0:
            continue
        T1v: cython.double = ks.T[n1]
        T2v: cython.double = ks.T[n2]
        hiT: cython.double = T1v if T1v > T2v else T2v
        if res[0] < hiT - _CAUSAL_SLACK:
            ks.stats[5] += 1
            continue
        if res[0] < cand:
            cand = res[0]
            c_par1 = n1
            c_par2 = n2
            c_lam = res[1]
            c_L = res[6]
            c_tlx = res[2]
            c_tly = res[3]
            c_thx = res[4]
            c_thy = res[5]

    if cand < ks.T[node]:
        ks.T[node] = cand
        ks.gx[node] = sh * c_thx
        ks.gy[node] = sh * c_thy
        ks.par1[node] = c_par1
        ks.par2[node] = c_par2
        ks.plam[node] = c_lam
        ks.pL[node] = c_L
        ks.ptx[node] = c_tlx
        ks.pty[node] = c_tly
    return cand


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _fmm_update(ks: KernelState, node: cython.Py_ssize_t) -> cython.double:
    """First-order upwind finite-difference update (4-point stencil)."""
    M: cython.Py_ssize_t = ks.M
    i: cython.Py_ssize_t = node // M
    j: cython.Py_ssize_t = node % M
    xh: cython.double = ks.xmin + i * ks.h
    yh: cython.double = ks.ymin + j * ks.h
    sh: cython.double = _s_val(ks.kind, ks.s0, ks.vx, ks.vy, xh, yh)
    h: cython.double = ks.h
    a: cython.double = INF
    sa: cython.int = 0
    b: cython.double = INF
    sb: cython.int = 0
    if i > 0 and ks.state[node - M] == VALID and ks.T[node - M] < a:
        a = ks.T[node - M]
        sa = -1
    if i < M - 1 and ks.state[node + M] == VALID and ks.T[node + M] < a:
        a = ks.T[node + M]
        sa = 1
    if j > 0 and ks.state[node - 1] == VALID and ks.T[node - 1] < b:
        b = ks.T[node - 1]
        sb = -1
    if j < M - 1 and ks.state[node + 1] == VALID and ks.T[node + 1] < b:
        b = ks.T[node + 1]
        sb = 1
    hs: cython.double = h * sh
    cand: cython.double
    cgx: cython.double
    cgy: cython.double
    if sa != 0 and sb != 0 and _fabs(a - b) < hs:
        cand = 0.5 * (a + b + sqrt(2.0 * hs * hs - (a - b) * (a - b)))
        cgx = (cand - a) / h * (1.0 if sa < 0 else -1.0)
        cgy = (cand - b) / h * (1.0 if sb < 0 else -1.0)
    elif sa != 0 and (sb == 0 or a <= b):
        cand = a + hs
        cgx = sh * (1.0 if sa < 0 else -1.0)
        cgy = 0.0
    elif sb != 0:
        cand = b + hs
        cgx = 0.0
        cgy = sh * (1.0 if sb < 0 else -1.0)
    else:
        return INF
    if cand < ks.T[node]:
        ks.T[node] = cand
        ks.gx[node] = cgx
        ks.gy[node] = cgy
        ks.par1[node] = -1
        ks.par2[node] = -1
    return cand


@cython.cfunc
@cython.exceptval(check=False)
def _mp0_value(ks: KernelState, x1x: cython.double, x1y: cython.double,
               x2x: cython.double, x2y: cython.double, T1: cython.double,
               T2: cython.double, xh: cython.double, yh: cython.double,
               lam: cython.double) -> cython.double:
    xlx: cython.double = x1x + lam * (x2x - x1x)
    xly: cython.double = x1y + lam * (x2y - x1y)
    L: cython.double = sqrt((xh - xlx) ** 2 + (yh - xly) ** 2)
    sm: cython.double = _s_val(ks.kind, ks.s0, ks.vx, ks.vy,
                               0.5 * (xlx + xh), 0.5 * (xly + yh))
    return (1.0 - lam) * T1 + lam * T2 + sm * L


@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _olim8_update(ks: KernelState, node: cython.Py_ssize_t) -> cython.double:
    """Midpoint-rule OLIM on the 8-point stencil, linear base interpolation."""
    M: cython.Py_ssize_t = ks.M
    i: cython.Py_ssize_t = node // M
    j: cython.Py_ssize_t = node % M
    xh: cython.double = ks.xmin + i * ks.h
    yh: cython.double = ks.ymin + j * ks.h
    sh: cython.double = _s_val(ks.kind, ks.s0, ks.vx, ks.vy, xh, yh)
    best: cython.double = INF
    bxl: cython.double = 0.0
    byl: cython.double = 0.0
    k: cython.int
    m: cython.int
    for k in range(8):
        ni: cython.Py_ssize_t = i + _ring_di(k)
        nj: cython.Py_ssize_t = j + _ring_dj(k)
        if not (0 <= ni < M and 0 <= nj < M):
            continue
        n1: cython.Py_ssize_t = ni * M + nj
        if ks.state[n1] != VALID:
            continue
        x1x: cython.double = ks.xmin + ni * ks.h
        x1y: cython.double = ks.ymin + nj * ks.h
        # one-point midpoint-rule candidate
        L: cython.double = sqrt((xh - x1x) ** 2 + (yh - x1y) ** 2)
        val: cython.double = ks.T[n1] + _s_val(
            ks.kind, ks.s0, ks.vx, ks.vy,
            0.5 * (x1x + xh), 0.5 * (x1y + yh)) * L
        if val < best:
            best = val
            bxl = x1x
            byl = x1y
        # triangle with the next CCW ring neighbor
        k2: cython.int = (k + 1) % 8
        ni2: cython.Py_ssize_t = i + _ring_di(k2)
        nj2: cython.Py_ssize_t = j + _ring_dj(k2)
        if not (0 <= ni2 < M and 0 <= nj2 < M):
            continue
        n2: cython.Py_ssize_t = ni2 * M + nj2
        if ks.state[n2] != VALID:
            continue
        x2x: cython.double = ks.xmin + ni2 * ks.h
        x2y: cython.double = ks.ymin + nj2 * ks.h
        T1: cython.double = ks.T[n1]
        T2: cython.double = ks.T[n2]
        # coarse scan, then golden-section refinement of the best bracket
        bl: cython.double = 0.0
        bv: cython.double = INF
        for m in range(9):
            lam: cython.double = m / 8.0
            vv: cython.double = _mp0_value(ks, x1x, x1y, x2x, x2y, T1, T2, xh, yh, lam)
            if vv < bv:
                bv = vv
                bl = lam
        lo: cython.double = bl - 0.125
        hi: cython.double = bl + 0.125
        if lo < 0.0:
            lo = 0.0
        if hi > 1.0:
            hi = 1.0
        gr: cython.double = 0.6180339887498949
        c1: cython.double = hi - gr * (hi - lo)
        c2: cython.double = lo + gr * (hi - lo)
        f1: cython.double = _mp0_value(ks, x1x, x1y, x2x, x2y, T1, T2, xh, yh, c1)
        f2: cython.double = _mp0_value(ks, x1x, x1y, x2x, x2y, T1, T2, xh, yh, c2)
        for m in range(60):
            if f1 < f2:
                hi = c2
                c2 = c1
                f2 = f1
                c1 = hi - gr * (hi - lo)
                f1 = _mp0_value(ks, x1x, x1y, x2x, x2y, T1, T2, xh, yh, c1)
            else:
                lo = c1
                c1 = c2
                f1 = f2
                c2 = lo + gr * (hi - lo)
                f2 = _mp0_value(ks, x1x, x1y, x2x, x2y, T1, T2, xh, yh, c2)
        lam = 0.5 * (lo + hi)
        vv = _mp0_value(ks, x1x, x1y, x2x, x2y, T1, T2, xh, yh, lam)
        if vv < bv:
            bv = vv
            bl = lam
        if bv < best:
            best = bv
            bxl = x1x + bl * (x2x - x1x)
            byl = x1y + bl * (x2y - x1y)
    if best == INF:
        return INF
    Lx: cython.double = xh - bxl
    Ly: cython.double = yh - byl
    Ln: cython.double = sqrt(Lx * Lx + Ly * Ly)
    if best < ks.T[node]:
        ks.T[node] = best
        ks.gx[node] = sh * Lx / Ln
        ks.gy[node] = sh * Ly / Ln
        ks.par1[node] = -1
        ks.par2[node] = -1
    return best


@cython.ccall
def update_node(ks: KernelState, node: cython.Py_ssize_t) -> cython.double:
    """Recompute the candidate for a trial node; write the jet on improvement."""
    if ks.variant == V_FMM:
        return _fmm_update(ks, node)
    if ks.variant == V_OLIM8:
        return _olim8_update(ks, node)
    return _bottom_up(ks, node)


@cython.ccall
@cython.boundscheck(False)
def pop_node(ks: KernelState) -> cython.Py_ssize_t:
    """Pop the minimal trial node and mark it valid; -1 when the heap is empty."""
    node: cython.Py_ssize_t = heap_pop(ks.T, ks.heap, ks.hpos, ks.hn)
    if node >= 0:
        ks.state[node] = VALID
    return node


@cython.ccall
@cython.boundscheck(False)
def update_neighbors(ks: KernelState, node: cython.Py_ssize_t):
    """March step for one popped node: far -> trial, then update trials."""
    M: cython.Py_ssize_t = ks.M
    i: cython.Py_ssize_t = node // M
    j: cython.Py_ssize_t = node % M
    step: cython.int = 2 if (ks.stencil == 4 or ks.variant == V_FMM) else 1
    k: cython.int = 0
    while k < 8:
        ni: cython.Py_ssize_t = i + _ring_di(k)
        nj: cython.Py_ssize_t = j + _ring_dj(k)
        k += step
        if not (0 <= ni < M and 0 <= nj < M):
            continue
        nn: cython.Py_ssize_t = ni * M + nj
        st: cython.int = ks.state[nn]
        if st == VALID:
            continue
        if ks.region[nn] != 0:
            # ground-truth data: frozen, pops in order but never re-updated
            continue
        if st == FAR:
            ks.state[nn] = TRIAL
            update_node(ks, nn)
            heap_push(ks.T, ks.heap, ks.hpos, ks.hn, nn)
        else:
            old: cython.double = ks.T[nn]
            update_node(ks, nn)
            if ks.T[nn] < old:
                heap_decrease(ks.T, ks.heap, ks.hpos, nn)


# ---------------------------------------------------------------------------
# cell marching
# ---------------------------------------------------------------------------

@cython.cfunc
@cython.boundscheck(False)
@cython.wraparound(False)
def _rebuild_cell(ks: KernelState, ci: cython.Py_ssize_t, cj: cython.Py_ssize_t):
    M: cython.Py_ssize_t = ks.M
    n00: cython.Py_ssize_t = ci * M + cj
    n10: cython.Py_ssize_t = n00 + M
    n01: cython.Py_ssize_t = n00 + 1
    n11: cython.Py_ssize_t = n10 + 1
    _coeffs16(ks.T[n00], ks.T[n10], ks.T[n01], ks.T[n11],
              ks.gx[n00], ks.gx[n10], ks.gx[n01], ks.gx[n11],
              ks.gy[n00], ks.gy[n10], ks.gy[n01], ks.gy[n11],
              ks.txy_sum[n00] / ks.txy_cnt[n00],
              ks.txy_sum[n10] / ks.txy_cnt[n10],
              ks.txy_sum[n01] / ks.txy_cnt[n01],
              ks.txy_sum[n11] / ks.txy_cnt[n11],
              ks.h, ks.ccoef[ci * (M - 1) + cj])


@cython.ccall
@cython.boundscheck(False)
def finalize_cells(ks: KernelState, node: cython.Py_ssize_t):
    """Validate completed cells incident on a newly valid node.

    A new cell contributes its corner mixed-partial estimates to the nodal
    running averages; every valid cell sharing a corner is then rebuilt so
    the global interpolant uses the refreshed averages.
    """
    M: cython.Py_ssize_t = ks.M
    i: cython.Py_ssize_t = node // M
    j: cython.Py_ssize_t = node % M
    eb: cython.double[::1] = ks.eb
    ci: cython.Py_ssize_t
    cj: cython.Py_ssize_t
    ri: cython.Py_ssize_t
    rj: cython.Py_ssize_t
    for ci in range(i - 1, i + 1):
        if ci < 0 or ci >= M - 1:
            continue
        for cj in range(j - 1, j + 1):
            if cj < 0 or cj >= M - 1:
                continue
            cid: cython.Py_ssize_t = ci * (M - 1) + cj
            if ks.cvalid[cid] != 0:
                continue
            n00: cython.Py_ssize_t = ci * M + cj
            n10: cython.Py_ssize_t = n00 + M
            n01: cython.Py_ssize_t = n00 + 1
            n11: cython.Py_ssize_t = n10 + 1
            if not (ks.state[n00] == VALID and ks.state[n10] == VALID
                    and ks.state[n01] == VALID and ks.state[n11] == VALID):
                continue
            if (ks.region[n00] != 0 and ks.region[n10] != 0
                    and ks.region[n01] != 0 and ks.region[n11] != 0):
                eb[0] = ks.region_txy[n00]
                eb[1] = ks.region_txy[n10]
                eb[2] = ks.region_txy[n01]
                eb[3] = ks.region_txy[n11]
            else:
                mb: cython.double = (ks.gy[n10] - ks.gy[n00]) / ks.h
                mt: cython.double = (ks.gy[n11] - ks.gy[n01]) / ks.h
                ml: cython.double = (ks.gx[n01] - ks.gx[n00]) / ks.h
                mr: cython.double = (ks.gx[n11] - ks.gx[n10]) / ks.h
                eb[0] = (3.0 * (mb + ml) - (mr + mt)) / 4.0
                eb[1] = (3.0 * (mb + mr) - (ml + mt)) / 4.0
                eb[2] = (3.0 * (ml + mt) - (mb + mr)) / 4.0
                eb[3] = (3.0 * (mr + mt) - (mb + ml)) / 4.0
            ks.txy_sum[n00] += eb[0]
            ks.txy_cnt[n00] += 1
            ks.txy_sum[n10] += eb[1]
            ks.txy_cnt[n10] += 1
            ks.txy_sum[n01] += eb[2]
            ks.txy_cnt[n01] += 1
            ks.txy_sum[n11] += eb[3]
            ks.txy_cnt[n11] += 1
            ks.cvalid[cid] = 1
            for ri in range(ci - 1, ci + 2):
                if ri < 0 or ri >= M - 1:
                    continue
                for rj in range(cj - 1, cj + 2):
                    if rj < 0 or rj >= M - 1:
                        continue
                    if ks.cvalid[ri * (M - 1) + rj] != 0:
                        _rebuild_cell(ks, ri, rj)


@cython.ccall
@cython.boundscheck(False)
def init_region_cells(ks: KernelState):
    """Build cells fully inside the exact-data region before marching."""
    M: cython.Py_ssize_t = ks.M
    ci: cython.Py_ssize_t
    cj: cython.Py_ssize_t
    for ci in range(M - 1):
        for cj in range(M - 1):
            n00: cython.Py_ssize_t = ci * M + cj
            n10: cython.Py_ssize_t = n00 + M
            n01: cython.Py_ssize_t = n00 + 1
            n11: cython.Py_ssize_t = n10 + 1
            if not (ks.region[n00] != 0 and ks.region[n10] != 0
                    and ks.region[n01] != 0 and ks.region[n11] != 0):
                continue
            ks.txy_sum[n00] += ks.region_txy[n00]
            ks.txy_cnt[n00] += 1
            ks.txy_sum[n10] += ks.region_txy[n10]
            ks.txy_cnt[n10] += 1
            ks.txy_sum[n01] += ks.region_txy[n01]
            ks.txy_cnt[n01] += 1
            ks.txy_sum[n11] += ks.region_txy[n11]
            ks.txy_cnt[n11] += 1
            ks.cvalid[ci * (M - 1) + cj] = 1
    for ci in range(M - 1):
        for cj in range(M - 1):
            if ks.cvalid[ci * (M - 1) + cj] != 0:
                _rebuild_cell(ks, ci, cj)


@cython.ccall
@cython.boundscheck(False)
def rebuild_valid_cells(ks: KernelState):
    """Recompute every valid cell's coefficients from the nodal averages."""
    M: cython.Py_ssize_t = ks.M
    ci: cython.Py_ssize_t
    cj: cython.Py_ssize_t
    for ci in range(M - 1):
        for cj in range(M - 1):
            if ks.cvalid[ci * (M - 1) + cj] != 0:
                _rebuild_cell(ks, ci, cj)


@cython.ccall
@cython.boundscheck(False)
def nodal_laplacian(ks: KernelState, node: cython.Py_ssize_t) -> cython.double:
    """Average T_xx + T_yy at a node over incident valid cells (NaN if none)."""
    M: cython.Py_ssize_t = ks.M
    i: cython.Py_ssize_t = node // M
    j: cython.Py_ssize_t = node % M
    acc: cython.double = 0.0
    cnt: cython.int = 0
    ci: cython.Py_ssize_t
    cj: cython.Py_ssize_t
    for ci in range(i - 1, i + 1):
        if ci < 0 or ci >= M - 1:
            continue
        for cj in range(j - 1, j + 1):
            if cj < 0 or cj >= M - 1:
                continue
            cid: cython.Py_ssize_t = ci * (M - 1) + cj
            if ks.cvalid[cid] == 0:
                continue
            u: cython.double = 1.0 if i > ci else 0.0
            v: cython.double = 1.0 if j > cj else 0.0
            _coef_jet(ks.ccoef[cid], u, v, ks.h, ks.cb)
            acc += ks.cb[3] + ks.cb[5]
            cnt += 1
    if cnt == 0:
        return NAN
    return acc / cnt


# ---------------------------------------------------------------------------
# public single-update wrappers (tests and the consistency study)
# ---------------------------------------------------------------------------

@cython.ccall
def solve_triangle(ks: KernelState, variant: cython.int,
                   x1x: cython.double, x1y: cython.double,
                   x2x: cython.double, x2y: cython.double,
                   xhx: cython.double, xhy: cython.double,
                   T1: cython.double, T2: cython.double,
                   g1x: cython.double, g1y: cython.double,
                   g2x: cython.double, g2y: cython.double,
                   lam0: cython.double, th0: cython.double,
                   cellid: cython.Py_ssize_t):
    """One triangle solve outside the marching loop.

    Returns (status, F, lam, (tlx, tly), (thx, thy), L, iters); status 0 on
    success, 1 no convergence, 2 rejected, 3 boundary minimizer.
    """
    sh: cython.double = _s_val(ks.kind, ks.s0, ks.vx, ks.vy, xhx, xhy)
    cc: cython.double[::1] = ks.ccoef[cellid if cellid >= 0 else 0]
    ccx: cython.double = 0.0
    ccy: cython.double = 0.0
    if cellid >= 0:
        ccx = ks.xmin + (cellid // (ks.M - 1)) * ks.h
        ccy = ks.ymin + (cellid % (ks.M - 1)) * ks.h
    res: cython.double[::1] = ks.rb
    _tri_solve(ks, variant, x1x, x1y, x2x, x2y, xhx, xhy,
               sh, T1, T2, g1x, g1y, g2x, g2y,
               cc, ccx, ccy, ks.h, lam0, th0, res)
    return (int(res[8]), res[0], res[1], (res[2], res[3]), (res[4], res[5]),
            res[6], int(res[7]))


@cython.ccall
def triangle_cost(ks: KernelState, variant: cython.int,
                  x1x: cython.double, x1y: cython.double,
                  x2x: cython.double, x2y: cython.double,
                  xhx: cython.double, xhy: cython.double,
                  T1: cython.double, T2: cython.double,
                  g1x: cython.double, g1y: cython.double,
                  g2x: cython.double, g2y: cython.double,
                  u0: cython.double, u1: cython.double, u2: cython.double,
                  want_grad: cython.int):
    """Cost (and analytic gradient) of one update at given variables."""
    dx: cython.double = x2x - x1x
    dy: cython.double = x2y - x1y
    lb: cython.double = sqrt(dx * dx + dy * dy)
    sh: cython.double = _s_val(ks.kind, ks.s0, ks.vx, ks.vy, xhx, xhy)
    F = _tri_cost(variant, ks.kind, ks.s0, ks.vx, ks.vy, x1x, x1y, x2x, x2y,
                  xhx, xhy, sh, T1, T2, g1x * dx + g1y * dy, g2x * dx + g2y * dy,
                  lb, dx / lb, dy / lb, ks.ccoef[0], 0.0, 0.0, ks.h,
                  u0, u1, u2, want_grad, ks.sc, ks.cb, ks.fb, ks.ob)
    return F, (ks.ob[0], ks.ob[1], ks.ob[2]), int(ks.ob[8])


@cython.ccall
def recover_tangent(ks: KernelState, lam: cython.double,
                    x1x: cython.double, x1y: cython.double,
                    x2x: cython.double, x2y: cython.double,
                    xhx: cython.double, xhy: cython.double,
                    T1: cython.double, T2: cython.double,
                    g1x: cython.double, g1y: cython.double,
                    g2x: cython.double, g2y: cython.double):
    """Unit base tangent from the eikonal equation; (ok, tlx, tly)."""
    dx: cython.double = x2x - x1x
    dy: cython.double = x2y - x1y
    lb: cython.double = sqrt(dx * dx + dy * dy)
    xlx: cython.double = x1x + lam * dx
    xly: cython.double = x1y + lam * dy
    ex: cython.double = xhx - xlx
    ey: cython.double = xhy - xly
    Ln: cython.double = sqrt(ex * ex + ey * ey)
    d1: cython.double = g1x * dx + g1y * dy
    d2: cython.double = g2x * dx + g2y * dy
    _base_hermite(lam, T1, T2, d1, d2, ks.fb)
    tang: cython.double = ks.fb[0] / lb
    s0v: cython.double = _s_val(ks.kind, ks.s0, ks.vx, ks.vy, xlx, xly)
    disc: cython.double = s0v * s0v - tang * tang
    if disc < 0.0:
        return False, 0.0, 0.0
    dvn: cython.double = sqrt(disc)
    vpx: cython.double = -dy / lb
    vpy: cython.double = dx / lb
    if vpx * ex / Ln + vpy * ey / Ln < 0.0:
        vpx = -vpx
        vpy = -vpy
    gxl: cython.double = dvn * vpx + tang * dx / lb
    gyl: cython.double = dvn * vpy + tang * dy / lb
    return True, gxl / s0v, gyl / s0v
