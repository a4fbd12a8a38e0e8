"""Acceptance criteria, one test per criterion.

Heavy convergence suites run once per module and are shared between
criteria.  Each test prints one ``ACCEPTANCE <n> <PASS|FAIL>`` line with
the measured numbers (run pytest with ``-s`` to stream them).
"""

import numpy as np
import pytest

from jetmarch import curve
from jetmarch.experiments import (converge, counterexample_run, error_mask,
                                  fit_order, grid_for_model, run_solve)
from jetmarch.slowness import get_model
from jetmarch.update import solve_update

SIZES = [65, 129, 257, 513]
JMM4_SIZES = [33, 65, 129, 257, 513]
# the source tables window out the smallest problem sizes; scaled to this
# ladder that keeps the largest three
JMM4_WINDOW = slice(2, None)


def _report(n, ok, detail):
    print(f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="module")
def constant_fits():
    return {s: converge("constant", s, SIZES)[1] for s in ("jmm1", "jmm2", "jmm3")}


@pytest.fixture(scope="module")
def linear2_fits():
    return {s: converge("linear2", s, SIZES)[1] for s in ("jmm1", "jmm2", "jmm3")}


def test_criterion_1_constant_orders(constant_fits):
    detail = []
    ok = True
    for s in ("jmm1", "jmm2", "jmm3"):
        pT = constant_fits[s]["Erms_T"].order
        pG = constant_fits[s]["Erms_gradT"].order
        detail.append(f"{s}: p(T)={pT:.2f} p(gradT)={pG:.2f}")
        ok &= 2.5 <= pT <= 3.3
        ok &= 2.3 <= pG <= 3.1
    assert _report(1, ok, "constant " + "; ".join(detail))


def test_criterion_2_linear2_jmm3(linear2_fits):
    pT = linear2_fits["jmm3"]["Erms_T"].order
    pG = linear2_fits["jmm3"]["Erms_gradT"].order
    others = {s: linear2_fits[s]["Erms_T"].order for s in ("jmm1", "jmm2")}
    ok = 2.6 <= pT <= 3.4 and 2.6 <= pG <= 3.4
    ok &= all(pT > v for v in others.values())
    assert _report(2, ok, f"linear2 jmm3: p(T)={pT:.2f} p(gradT)={pG:.2f}; "
                   f"jmm1 p(T)={others['jmm1']:.2f} jmm2 p(T)={others['jmm2']:.2f}")


def test_criterion_3_sloth_jmm1():
    _, fits = converge("sloth", "jmm1", SIZES)
    pT = fits["Erms_T"].order
    pG = fits["Erms_gradT"].order
    ok = 2.1 <= pT <= 2.8 and 1.5 <= pG <= 2.2
    assert _report(3, ok, f"sloth jmm1: p(T)={pT:.2f} p(gradT)={pG:.2f}")


def test_criterion_4_jmm4_2jet():
    _, fits = converge("constant", "jmm4", JMM4_SIZES, fit_window=JMM4_WINDOW)
    table = {"Erms_T": 3.09, "Erms_Tx": 3.11, "Erms_Ty": 3.11,
             "Erms_Txx": 2.01, "Erms_Txy": 2.05, "Erms_Tyy": 2.01}
    ok = True
    detail = []
    for key, want in table.items():
        got = fits[key].order
        detail.append(f"{key}={got:.2f}")
        ok &= abs(got - want) <= 0.4
    assert _report(4, ok, "jmm4 constant 2-jet: " + " ".join(detail))


def test_criterion_5_fmm_first_order():
    ok = True
    detail = []
    for prob in ("constant", "linear1"):
        _, fits = converge(prob, "fmm", SIZES)
        p = fits["Erms_T"].order
        detail.append(f"{prob}: p(T)={p:.2f}")
        ok &= 0.8 <= p <= 1.3
    assert _report(5, ok, "fmm " + "; ".join(detail))


def test_criterion_6_counterexample_stencils():
    res = counterexample_run(SIZES, solver="jmm3", slab_depth=0.1)
    p8 = res["eight"][1]["Erms_T"].order
    p4 = res["four"][1]["Erms_T"].order
    ok = (p8 - p4) >= 0.5 and p4 <= 2.3
    assert _report(6, ok, f"counterexample jmm3: eight={p8:.2f} four={p4:.2f} "
                   f"gap={p8 - p4:.2f}")


def test_criterion_7_single_update_consistency():
    m = get_model("linear2")
    xh = np.array([0.65, 0.40])
    gth = m.grad_tau(xh)
    incoming = np.arctan2(-gth[1], -gth[0])
    from jetmarch.grid import RING8

    ring = np.array(RING8, dtype=float)
    angles = np.arctan2(ring[:, 1], ring[:, 0])
    k = int(np.argmin([abs((incoming - a + np.pi) % (2 * np.pi) - np.pi)
                       + abs((angles[(i + 1) % 8] - incoming + np.pi)
                             % (2 * np.pi) - np.pi)
                       for i, a in enumerate(angles)]))
    hs = [0.04, 0.02, 0.01, 0.005, 0.0025]
    terrs, gerrs = [], []
    for h in hs:
        x1 = xh + h * ring[k]
        x2 = xh + h * ring[(k + 1) % 8]
        r = solve_update(m, "jmm3", xh, x1, x2, float(m.tau(x1)),
                         float(m.tau(x2)), m.grad_tau(x1), m.grad_tau(x2))
        assert r.converged and not r.boundary
        terrs.append(abs(r.value - float(m.tau(xh))))
        gerrs.append(float(np.linalg.norm(r.grad - gth)))
    pT = np.polyfit(np.log(hs), np.log(terrs), 1)[0]
    pG = np.polyfit(np.log(hs), np.log(gerrs), 1)[0]
    ok = pT >= 3.5 and pG >= 1.7
    assert _report(7, ok, f"single-update jmm3/linear2: p(T)={pT:.2f} "
                   f"p(gradT)={pG:.2f}")


def test_criterion_8_property_suites():
    from conftest import r2_sequence
    import test_update

    checks = {}

    # eikonal residual of every analytic solution, 1e-9 relative
    worst = 0.0
    for name in ("constant", "linear1", "linear2", "sine", "sloth",
                 "counterexample"):
        m = get_model(name)
        xmin, ymin, ext = m.domain
        pts = np.array([xmin, ymin]) + ext * r2_sequence(1000)
        r = np.hypot(pts[:, 0], pts[:, 1])
        pts = pts[r > 1e-3]
        g = m.grad_tau(pts)
        resid = np.abs(np.hypot(g[:, 0], g[:, 1]) - m.s(pts)) / m.s(pts)
        worst = max(worst, float(resid.max()))
    checks["eikonal-residual"] = worst <= 1e-9

    # Simpson exactness on a quadratic integrand, 1e-13 relative
    class Quad:
        def s(self, x):
            x = np.asarray(x)
            return 0.7 - 0.3 * x[..., 0] + 0.45 * x[..., 0] ** 2

    L = 0.83
    g = curve.UpdateGeometry.make([L, 0.0], [0.0, 0.0], [0.0, 1e-3], 0.0)
    ev = curve.cubic_curve_mid(g, g.ell, g.ell)
    exact = 0.7 * L - 0.3 * L**2 / 2 + 0.45 * L**3 / 3
    checks["simpson-exactness"] = abs(
        curve.simpson_cost(g, ev, 0.0, Quad()) - exact) <= 1e-13 * abs(exact)

    # bicubic reproduction of per-variable cubics, 1e-12
    from jetmarch import cellmarch

    rng = np.random.default_rng(3)
    C = rng.normal(size=(4, 4))

    def poly(p, mder=0, nder=0):
        out = 0.0
        for mm in range(mder, 4):
            for nn in range(nder, 4):
                c = C[mm, nn]
                f = 1.0
                for t in range(mder):
                    f *= mm - t
                for t in range(nder):
                    f *= nn - t
                out = out + c * f * p[..., 0] ** (mm - mder) \
                    * p[..., 1] ** (nn - nder)
        return out

    h = 0.3
    pts = np.array([[0.0, 0.0], [h, 0.0], [0.0, h], [h, h]]) + [0.2, -0.1]
    cell = cellmarch.BicubicCell.from_corner_data(
        poly(pts), poly(pts, 1, 0), poly(pts, 0, 1), poly(pts, 1, 1),
        0.2, -0.1, h)
    errs = []
    for p in 0.2 + h * rng.random((25, 2)) * [1, 1] + [0, -0.3 * h]:
        p = np.array([min(max(p[0], 0.2), 0.2 + h),
                      min(max(p[1], -0.1), -0.1 + h)])
        errs.append(abs(cell.eval(p)[0] - float(poly(p))))
    checks["bicubic-reproduction"] = max(errs) <= 1e-12

    # bottom-up equals brute force on 200 random configurations
    from jetmarch.grid import Grid2
    from jetmarch.kernels import impl as K

    rng = np.random.default_rng(77)
    worst_gap = 0.0
    for trial in range(200):
        name = ("constant", "linear2", "sine", "sloth")[trial % 4]
        model = get_model(name)
        xmin, ymin, ext = model.domain
        h = rng.uniform(0.004, 0.015)
        cx = rng.uniform(xmin + 0.3 * ext, xmin + 0.9 * ext - 8 * h)
        cy = rng.uniform(ymin + 0.3 * ext, ymin + 0.9 * ext - 8 * h)
        grid = Grid2(cx, cy, 9, h)
        node = (4, 4)
        mask = np.ones((9, 9), dtype=bool)
        mask[node] = False
        ms = test_update._exact_state(model, "jmm3", grid, mask)
        got = float(K.update_node(ms.ks, grid.flat(node)))
        want = test_update.brute_force_candidate(ms, node)
        worst_gap = max(worst_gap, abs(got - want))
    checks["bottom-up-vs-brute-force"] = worst_gap <= 1e-10

    # analytic cost gradients match finite differences with 2nd-order decay
    from jetmarch.update import cost_and_gradient

    m = get_model("sine")
    xh = np.array([0.41, 0.33])
    x1 = xh + 0.02 * np.array([-1.0, -1.0])
    x2 = xh + 0.02 * np.array([0.0, -1.0])
    u = np.array([0.4, 1.1, 0.9])
    _, ga = cost_and_gradient(m, "jmm1", xh, x1, x2, float(m.tau(x1)),
                              float(m.tau(x2)), m.grad_tau(x1),
                              m.grad_tau(x2), u)
    errs = []
    for st in (1e-3, 1e-4):
        fd = np.zeros(3)
        for a in range(3):
            up, um = u.copy(), u.copy()
            up[a] += st
            um[a] -= st
            Fp, _ = cost_and_gradient(m, "jmm1", xh, x1, x2, float(m.tau(x1)),
                                      float(m.tau(x2)), m.grad_tau(x1),
                                      m.grad_tau(x2), up)
            Fm, _ = cost_and_gradient(m, "jmm1", xh, x1, x2, float(m.tau(x1)),
                                      float(m.tau(x2)), m.grad_tau(x1),
                                      m.grad_tau(x2), um)
            fd[a] = (Fp - Fm) / (2 * st)
        errs.append(np.abs(fd - ga[:3]).max())
    checks["gradient-fd-decay"] = errs[1] <= errs[0] * 0.05

    # global C1 continuity of the marched piecewise bicubic
    from jetmarch import cellmarch as cm

    ms = run_solve("constant", "jmm4", 65)
    rng = np.random.default_rng(5)
    worst_jump = 0.0
    for _ in range(20):
        ci = int(rng.integers(0, ms.grid.M - 2))
        cj = int(rng.integers(0, ms.grid.M - 1))
        a = cm.get_cell(ms, (ci, cj))
        b = cm.get_cell(ms, (ci + 1, cj))
        x = ms.grid.xmin + (ci + 1) * ms.grid.h
        for t in np.linspace(0.05, 0.95, 10):
            y = ms.grid.ymin + (cj + t) * ms.grid.h
            v1, g1, _ = a.eval([x, y])
            v2, g2, _ = b.eval([x, y])
            worst_jump = max(worst_jump, abs(v1 - v2), float(np.abs(g1 - g2).max()))
    checks["c1-continuity"] = worst_jump <= 1e-11

    ok = all(checks.values())
    assert _report(8, ok, " ".join(f"{k}={'ok' if v else 'FAIL'}"
                                   for k, v in checks.items()))


def test_criterion_9_amplitude():
    from jetmarch.amplitude import (amplitude_from_spreading,
                                    march_with_spreading)

    model = get_model("constant")
    errs, hs = [], []
    for M in (65, 129, 257):
        grid = grid_for_model(model, M)
        ms = march_with_spreading(grid, model)
        pts = grid.points()
        r = np.hypot(pts[..., 0], pts[..., 1])
        mask = error_mask(ms)
        J = ms.J.reshape(M, M)
        errs.append(float((np.abs(J[mask] - r[mask]) / r[mask]).max()))
        hs.append(grid.h)
    p = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])

    A = amplitude_from_spreading(1.0, np.array([0.3, 0.0]), model, 2 * np.pi)
    spot = abs(abs(A) - 0.079577471545947668) <= 1e-12
    phase = abs(np.angle(A) - np.pi / 4) <= 1e-13
    ok = p >= 0.8 and spot and phase
    assert _report(9, ok, f"spreading order={p:.2f} amplitude-spot="
                   f"{'ok' if spot and phase else 'FAIL'}")
