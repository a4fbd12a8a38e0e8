import numpy as np
import pytest

from jetmarch.kernels import available_impls


@pytest.fixture(params=[name for name, _ in available_impls()])
def kimpl(request):
    """Every importable kernel implementation (compiled and pure)."""
    return dict(available_impls())[request.param]


def make_kernel_state(K, model, variant, M=2, h=0.1, stencil=8, grid=None):
    """Minimal KernelState usable for single-update calls."""
    if grid is not None:
        M, h, xmin, ymin = grid.M, grid.h, grid.xmin, grid.ymin
    else:
        xmin = ymin = 0.0
    kind, s0, vx, vy = model.kernel_params
    N = M * M
    return K.KernelState(
        M, h, xmin, ymin, kind, s0, vx, vy, variant, stencil,
        np.zeros(N, dtype=np.intc), np.full(N, np.inf), np.zeros(N),
        np.zeros(N),
        np.zeros(N, dtype=np.intc), np.full(N, -1, dtype=np.intc),
        np.zeros(1, dtype=np.int64),
        np.full(N, -1, dtype=np.intc), np.full(N, -1, dtype=np.intc),
        np.zeros(N), np.zeros(N), np.zeros(N), np.zeros(N),
        0, np.zeros((1, 16)), np.zeros(1, dtype=np.intc),
        np.zeros(1), np.zeros(1, dtype=np.intc),
        np.zeros(N, dtype=np.intc), np.zeros(1),
        np.zeros(8, dtype=np.int64), np.zeros(64))


def r2_sequence(n, seed=0.5):
    """Low-discrepancy points in [0, 1)^2 (plastic-constant lattice)."""
    g = 1.32471795724474602596
    a1, a2 = 1.0 / g, 1.0 / g**2
    i = np.arange(1, n + 1)
    return np.stack([(seed + a1 * i) % 1.0, (seed + a2 * i) % 1.0], axis=-1)
