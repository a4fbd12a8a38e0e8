import numpy as np
import pytest

from jetmarch.slowness import MODEL_NAMES, get_model

from conftest import r2_sequence

# frozen with a 50-digit arbitrary-precision scratch script
LINEAR1_TAU_11 = 1.3840330783900664
LINEAR2_TAU_11 = 1.9248473002384138
SLOTH_TAU = 0.51689063177128738
SINE_TAU = 0.099933422158758369


def sample_points(model, n=1000):
    """Quasi-random points in the model domain, off the source."""
    xmin, ymin, ext = model.domain
    pts = np.array([xmin, ymin]) + ext * r2_sequence(n)
    r = np.hypot(pts[:, 0] - model.source[0], pts[:, 1] - model.source[1])
    return pts[r > 1e-3]


def test_constant_values():
    m = get_model("constant")
    assert m.s(np.array([0.3, -0.7])) == 1.0
    assert np.all(m.grad_s(np.array([0.3, -0.7])) == 0.0)
    assert m.tau(np.array([1.0, 0.0])) == pytest.approx(1.0)
    assert m.grad_tau(np.array([1.0, 0.0])) == pytest.approx([1.0, 0.0])


def test_linear2_values():
    m = get_model("linear2")
    assert m.s(np.array([0.0, 0.0])) == pytest.approx(2.0)
    assert m.tau(np.array([1.0, 1.0])) == pytest.approx(LINEAR2_TAU_11, rel=1e-15)


def test_linear1_tau_spot():
    m = get_model("linear1")
    assert m.tau(np.array([1.0, 1.0])) == pytest.approx(LINEAR1_TAU_11, rel=1e-15)


def test_sloth_values():
    m = get_model("sloth")
    assert m.s(np.array([0.0, 0.0])) == pytest.approx(2.0)
    assert m.s(np.array([0.0, 0.5])) == pytest.approx(1.0)
    assert m.tau(np.array([0.25, 0.1])) == pytest.approx(SLOTH_TAU, rel=1e-14)


def test_sine_values():
    m = get_model("sine")
    assert m.tau(np.array([0.0, 0.0])) == 0.0
    assert m.tau(np.array([0.4, -0.2])) == pytest.approx(SINE_TAU, rel=1e-15)


def test_counterexample_matches_linear2():
    # the quadrant-problem slowness is the same linear speed as linear2;
    # its closed form 2*acosh(1 + r^2/(2(1+x))) must agree
    m = get_model("counterexample")
    pts = sample_points(m, 50)
    x, y = pts[:, 0], pts[:, 1]
    direct = 2.0 * np.arccosh(1.0 + (x * x + y * y) / (2.0 * (1.0 + x)))
    assert np.allclose(m.tau(pts), direct, rtol=1e-13)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_eikonal_residual(name):
    # |grad tau| = s to 1e-9 relative at 1000 quasi-random points
    m = get_model(name)
    pts = sample_points(m)
    g = m.grad_tau(pts)
    s = m.s(pts)
    resid = np.abs(np.hypot(g[..., 0], g[..., 1]) - s)
    assert np.all(resid <= 1e-9 * s)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_grad_s_matches_fd(name):
    m = get_model(name)
    pts = sample_points(m, 40)
    steps = [1e-3, 1e-4, 1e-5]
    errs = []
    for st in steps:
        dx = np.array([st, 0.0])
        dy = np.array([0.0, st])
        fd = np.stack([(m.s(pts + dx) - m.s(pts - dx)) / (2 * st),
                       (m.s(pts + dy) - m.s(pts - dy)) / (2 * st)], axis=-1)
        errs.append(np.abs(fd - m.grad_s(pts)).max())
    errs = np.array(errs)
    if errs[0] < 1e-13:        # constant slowness: gradient identically zero
        assert np.all(errs < 1e-12)
        return
    # second-order decay while above the roundoff floor
    if errs[1] > 1e-10:
        assert errs[1] <= errs[0] * 0.05
    if errs[2] > 1e-10:
        assert errs[2] <= errs[1] * 0.05
    assert errs[2] < max(1e-9, errs[0] * 1e-3)


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_hess_tau_symmetric_and_matches_fd(name):
    m = get_model(name)
    pts = sample_points(m, 30)
    H = m.hess_tau(pts)
    assert np.allclose(H[..., 0, 1], H[..., 1, 0], atol=1e-14)
    st = 1e-6
    dx = np.array([st, 0.0])
    dy = np.array([0.0, st])
    fd0 = (m.grad_tau(pts + dx) - m.grad_tau(pts - dx)) / (2 * st)
    fd1 = (m.grad_tau(pts + dy) - m.grad_tau(pts - dy)) / (2 * st)
    fd = np.stack([fd0, fd1], axis=-2)
    scale = 1.0 + np.abs(H)
    assert np.all(np.abs(fd - H) / scale < 5e-5)


def test_grad_c_consistency():
    m = get_model("sloth")
    pts = sample_points(m, 20)
    st = 1e-6
    dx = np.array([st, 0.0])
    fd = (m.c(pts + dx) - m.c(pts - dx)) / (2 * st)
    assert np.allclose(fd, m.grad_c(pts)[:, 0], rtol=1e-7, atol=1e-10)


def test_domain_violation_errors():
    with pytest.raises(ValueError):
        get_model("sloth").s(np.array([0.0, 10.0]))
    with pytest.raises(ValueError):
        get_model("linear2").s(np.array([-10.0, 0.0]))


def test_source_singularity_error():
    m = get_model("constant")
    with pytest.raises(ValueError):
        m.grad_tau(np.array([0.0, 0.0]))
    with pytest.raises(ValueError):
        m.hess_tau(np.array([[0.3, 0.2], [0.0, 0.0]]))


def test_unknown_model():
    with pytest.raises(ValueError):
        get_model("nope")


def test_param_overrides():
    m = get_model("linear2", s0=1.0, v=(0.2, 0.1))
    p = np.array([0.3, 0.3])
    assert m.s(p) == pytest.approx(1.0 / (1.0 + 0.2 * 0.3 + 0.1 * 0.3))
    # coefficients that blow up on the domain are rejected at construction
    with pytest.raises(ValueError):
        get_model("linear1", s0=2.0, v=(0.5, 0.0))
