import numpy as np
import pytest

from jetmarch import cellmarch
from jetmarch.experiments import grid_for_model, run_solve
from jetmarch.slowness import get_model


def corner_points(x0, y0, h):
    # corner order (0,0), (1,0), (0,1), (1,1)
    return np.array([[x0, y0], [x0 + h, y0], [x0, y0 + h], [x0 + h, y0 + h]])


def test_estimate_txy_bilinear_field():
    # T = xy: gradients (y, x), all corner mixed partials exactly 1
    h = 0.2
    pts = corner_points(0.3, 0.5, h)
    grads = np.stack([pts[:, 1], pts[:, 0]], axis=1)
    assert cellmarch.estimate_txy(grads, h) == pytest.approx([1.0] * 4, abs=1e-14)


def test_estimate_txy_separable_field():
    # T = x^2 + y^2: mixed partial zero
    h = 0.1
    pts = corner_points(-0.2, 0.4, h)
    grads = 2.0 * pts
    assert cellmarch.estimate_txy(grads, h) == pytest.approx([0.0] * 4, abs=1e-14)


def test_estimate_txy_quartic_frozen():
    # T = x^2 y^2 on [0, h]^2 with h = 1/4; corner values from the symbolic
    # bilinear-extrapolation oracle: (-1/16, 1/16, 1/16, 3/16)
    h = 0.25
    pts = corner_points(0.0, 0.0, h)
    grads = np.stack([2 * pts[:, 0] * pts[:, 1] ** 2,
                      2 * pts[:, 0] ** 2 * pts[:, 1]], axis=1)
    got = cellmarch.estimate_txy(grads, h)
    assert got == pytest.approx([-1 / 16, 1 / 16, 1 / 16, 3 / 16], abs=1e-15)


def test_estimate_txy_second_order():
    # smooth synthetic field, exact corner gradients: O(h^2) twist accuracy
    def g(p):
        return np.stack([np.cos(p[:, 0]) * np.cos(p[:, 1]) + 2 * p[:, 0] * p[:, 1] ** 3,
                         -np.sin(p[:, 0]) * np.sin(p[:, 1]) + 3 * p[:, 0] ** 2 * p[:, 1] ** 2],
                        axis=1)

    def txy_true(p):
        return -np.cos(p[:, 0]) * np.sin(p[:, 1]) + 6 * p[:, 0] * p[:, 1] ** 2

    errs = []
    hs = [0.2, 0.1, 0.05, 0.025]
    for h in hs:
        pts = corner_points(0.3, 0.4, h)
        est = cellmarch.estimate_txy(g(pts), h)
        errs.append(np.abs(est - txy_true(pts)).max())
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope >= 1.8


def _bicubic_from_field(f, fx, fy, fxy, x0, y0, h):
    pts = corner_points(x0, y0, h)
    return cellmarch.BicubicCell.from_corner_data(
        f(pts), fx(pts), fy(pts), fxy(pts), x0, y0, h)


def test_bicubic_reproduces_corner_data():
    rng = np.random.default_rng(5)
    h = 0.2
    cell = cellmarch.BicubicCell.from_corner_data(
        rng.normal(size=4), rng.normal(size=4), rng.normal(size=4),
        rng.normal(size=4), 0.1, 0.2, h)
    # rebuild the data from evaluations at the corners
    pts = corner_points(0.1, 0.2, h)
    vals = np.array([cell.eval(p)[0] for p in pts])
    # reproduce values (gradients checked through the cubic test below)
    co = cell.coeffs
    assert vals[0] == pytest.approx(co[0, 0], rel=1e-12)


def test_bicubic_exact_on_per_variable_cubics():
    # polynomials of degree <= 3 in each variable are reproduced to 1e-12
    rng = np.random.default_rng(8)
    C = rng.normal(size=(4, 4))

    def f(p):
        return sum(C[m, n] * p[..., 0] ** m * p[..., 1] ** n
                   for m in range(4) for n in range(4))

    def fx(p):
        return sum(m * C[m, n] * p[..., 0] ** (m - 1) * p[..., 1] ** n
                   for m in range(1, 4) for n in range(4))

    def fy(p):
        return sum(n * C[m, n] * p[..., 0] ** m * p[..., 1] ** (n - 1)
                   for m in range(4) for n in range(1, 4))

    def fxy(p):
        return sum(m * n * C[m, n] * p[..., 0] ** (m - 1) * p[..., 1] ** (n - 1)
                   for m in range(1, 4) for n in range(1, 4))

    x0, y0, h = 0.4, -0.3, 0.37
    cell = _bicubic_from_field(f, fx, fy, fxy, x0, y0, h)
    rng2 = np.random.default_rng(9)
    for _ in range(20):
        p = np.array([x0 + h * rng2.random(), y0 + h * rng2.random()])
        val, grad, hess = cell.eval(p)
        assert val == pytest.approx(float(f(p)), rel=1e-12, abs=1e-12)
        assert grad[0] == pytest.approx(float(fx(p)), rel=1e-11, abs=1e-11)
        assert grad[1] == pytest.approx(float(fy(p)), rel=1e-11, abs=1e-11)
        assert hess[0, 1] == pytest.approx(float(fxy(p)), rel=1e-10, abs=1e-10)


def test_bicubic_cubic_second_derivative():
    # T = x^3 sampled exactly: T_xx = 6x throughout the cell
    x0, y0, h = 0.2, 0.0, 0.25
    cell = _bicubic_from_field(
        lambda p: p[..., 0] ** 3, lambda p: 3 * p[..., 0] ** 2,
        lambda p: 0 * p[..., 0], lambda p: 0 * p[..., 0], x0, y0, h)
    for ux in (0.1, 0.5, 0.9):
        x = x0 + ux * h
        _, _, hess = cell.eval([x, y0 + 0.3 * h])
        assert hess[0, 0] == pytest.approx(6 * x, rel=1e-10)
        assert abs(hess[1, 1]) < 1e-10


def test_bicubic_center_of_xy():
    cell = _bicubic_from_field(
        lambda p: p[..., 0] * p[..., 1], lambda p: p[..., 1],
        lambda p: p[..., 0], lambda p: np.ones(p.shape[:-1]), 0.0, 0.0, 0.5)
    _, _, hess = cell.eval([0.25, 0.25])
    assert hess[0, 1] == pytest.approx(1.0, rel=1e-13)
    assert abs(hess[0, 0]) < 1e-12 and abs(hess[1, 1]) < 1e-12


def test_eval_outside_cell_raises():
    cell = _bicubic_from_field(
        lambda p: p[..., 0], lambda p: np.ones(p.shape[:-1]),
        lambda p: 0 * p[..., 0], lambda p: 0 * p[..., 0], 0.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        cell.eval([0.5, 0.05])


# -- marched cell store -------------------------------------------------------

@pytest.fixture(scope="module")
def jmm4_march():
    return run_solve("constant", "jmm4", 65)


def test_all_cells_valid_after_march(jmm4_march):
    assert np.all(jmm4_march.cvalid == 1)


def test_global_c1_continuity(jmm4_march):
    # value and gradient continuous across shared edges
    ms = jmm4_march
    grid = ms.grid
    rng = np.random.default_rng(12)
    samples = np.linspace(0.05, 0.95, 10)
    for _ in range(30):
        ci = rng.integers(0, grid.M - 2)
        cj = rng.integers(0, grid.M - 1)
        left = cellmarch.get_cell(ms, (ci, cj))
        right = cellmarch.get_cell(ms, (ci + 1, cj))
        x = grid.xmin + (ci + 1) * grid.h
        for t in samples:
            y = grid.ymin + (cj + t) * grid.h
            v1, g1, _ = left.eval([x, y])
            v2, g2, _ = right.eval([x, y])
            assert abs(v1 - v2) <= 1e-11
            assert np.abs(g1 - g2).max() <= 1e-11


def test_averaging_idempotent(jmm4_march):
    ms = jmm4_march
    before = ms.ccoef.copy()
    cellmarch.rebuild_all(ms)
    assert np.array_equal(before, ms.ccoef)


def test_twist_counts(jmm4_march):
    # every node of a completed march has at least one contributing cell
    assert np.all(jmm4_march.txy_cnt >= 1)


def test_nodal_second_partials_exact_bicubic():
    # inject a global bicubic field into a march's cell store: the nodal
    # Hessian average reproduces it exactly
    from jetmarch.grid import Grid2
    from jetmarch.marcher import MarchState

    m = get_model("constant")
    grid = Grid2(0.0, 0.0, 9, 0.125)
    ms = MarchState(grid, m, "jmm4")
    pts = grid.points().reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    ms.T[:] = x**2 * y + 0.5 * y**3 + x * y
    ms.gx[:] = 2 * x * y + y
    ms.gy[:] = x**2 + 1.5 * y**2 + x
    ms.txy_sum[:] = 2 * x + 1.0
    ms.txy_cnt[:] = 1
    ms.cvalid[:] = 1
    cellmarch.rebuild_all(ms)
    txx, txy, tyy = cellmarch.nodal_second_partials(ms)
    assert np.allclose(txx.reshape(-1), 2 * y, atol=1e-11)
    assert np.allclose(txy.reshape(-1), 2 * x + 1, atol=1e-11)
    assert np.allclose(tyy.reshape(-1), 3 * y, atol=1e-11)


def test_nodal_second_partials_requires_cells():
    ms = run_solve("constant", "jmm1", 9)
    with pytest.raises(ValueError):
        cellmarch.nodal_second_partials(ms)


def test_jmm4_2jet_single_size(jmm4_march):
    # coarse sanity on the marched second partials vs the exact Hessian
    from jetmarch.experiments import error_norms

    rep = error_norms(jmm4_march)
    assert rep.components["Erms_Txx"] < 2e-2
    assert rep.components["Erms_Txy"] < 2e-2


def test_finalize_cell_averaging_semantics():
    # two adjacent cells, exact T = xy data: the first finalized cell sets
    # its corners to its own estimate (average of one); finalizing the
    # second cell averages two identical estimates so corners stay 1
    from jetmarch.grid import Grid2
    from jetmarch.kernels import impl as K
    from jetmarch.marcher import MarchState, VALID

    m = get_model("constant")
    grid = Grid2(0.2, 0.3, 3, 0.1)
    ms = MarchState(grid, m, "jmm4")
    pts = grid.points().reshape(-1, 2)
    ms.T[:] = pts[:, 0] * pts[:, 1]
    ms.gx[:] = pts[:, 1]
    ms.gy[:] = pts[:, 0]
    # validate the six nodes of the two left cells
    for n in [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)]:
        ms.state[grid.flat(n)] = VALID
    K.finalize_cells(ms.ks, grid.flat((1, 1)))
    assert ms.cvalid[grid.cell_flat((0, 0))] == 1
    assert ms.cvalid[grid.cell_flat((0, 1))] == 1
    shared = grid.flat((0, 1))
    assert ms.txy_cnt[shared] == 2
    assert ms.txy_sum[shared] / ms.txy_cnt[shared] == pytest.approx(1.0)
    lone = grid.flat((0, 0))
    assert ms.txy_cnt[lone] == 1


def test_finalize_cell_quartic_average_second_order():
    # synthetic quartic: averaged corner estimates differ from the
    # single-cell estimate and both stay O(h^2) accurate
    from jetmarch.grid import Grid2
    from jetmarch.kernels import impl as K
    from jetmarch.marcher import MarchState, VALID

    m = get_model("constant")
    errs_single, errs_avg = [], []
    hs = [0.08, 0.04, 0.02]
    for h in hs:
        grid = Grid2(0.4, 0.5, 3, h)
        ms = MarchState(grid, m, "jmm4")
        pts = grid.points().reshape(-1, 2)
        x, y = pts[:, 0], pts[:, 1]
        ms.T[:] = x**2 * y**2 + x**3 * y
        ms.gx[:] = 2 * x * y**2 + 3 * x**2 * y
        ms.gy[:] = 2 * x**2 * y + x**3
        ms.state[:] = VALID
        for n in [(1, 1), (2, 2), (0, 2), (2, 0)]:
            K.finalize_cells(ms.ks, grid.flat(n))
        assert np.all(ms.cvalid == 1)
        shared = grid.flat((1, 1))  # center node: 4 incident cells
        true_txy = 4 * pts[shared, 0] * pts[shared, 1] + 3 * pts[shared, 0] ** 2
        avg = ms.txy_sum[shared] / ms.txy_cnt[shared]
        # single-cell estimate of the lower-left cell at its (1,1) corner
        g = np.stack([ms.gx, ms.gy], axis=1)
        corners = [grid.flat(c) for c in grid.cell_corners((0, 0))]
        order = [corners[0], corners[1], corners[3], corners[2]]
        single = cellmarch.estimate_txy(g[order], h)[3]
        assert ms.txy_cnt[shared] == 4
        assert avg != single
        errs_single.append(abs(single - true_txy))
        errs_avg.append(abs(avg - true_txy))
    for errs in (errs_single, errs_avg):
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope >= 1.8
