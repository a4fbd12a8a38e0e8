#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times single triangle solves in-process (both implementations are
importable side by side) and full marches in subprocesses (the marching
layer binds to one implementation at import, selected by
JETMARCH_PURE_PYTHON).

Usage: python benchmarks/bench_kernels.py [--march-size 33]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

from jetmarch.kernels import available_impls  # noqa: E402
from jetmarch.slowness import get_model  # noqa: E402
from conftest import make_kernel_state  # noqa: E402


def bench_solves(n=2000):
    model = get_model("linear2")
    rng = np.random.default_rng(0)
    xh = np.array([0.45, 0.35])
    h = 0.01
    bases = []
    from jetmarch.grid import RING8

    for _ in range(n):
        k = rng.integers(0, 8)
        x1 = xh + h * np.array(RING8[k])
        x2 = xh + h * np.array(RING8[(k + 1) % 8])
        bases.append((x1, x2, float(model.tau(x1)), float(model.tau(x2)),
                      model.grad_tau(x1), model.grad_tau(x2)))
    out = {}
    for name, K in available_impls():
        ks = make_kernel_state(K, model, K.V_JMM3, h=h)
        t0 = time.perf_counter()
        acc = 0.0
        for x1, x2, T1, T2, g1, g2 in bases:
            r = K.solve_triangle(ks, K.V_JMM3, x1[0], x1[1], x2[0], x2[1],
                                 xh[0], xh[1], T1, T2, g1[0], g1[1],
                                 g2[0], g2[1], 0.25, -2.0, -1)
            acc += r[1]
        dt = time.perf_counter() - t0
        out[name] = dt / n
        print(f"  {name:9s} {1e6 * dt / n:9.1f} us/solve   (checksum {acc:.6f})")
    return out


def bench_march(M):
    code = (
        "import time\n"
        "from jetmarch.experiments import run_solve\n"
        "t0 = time.perf_counter()\n"
        "ms = run_solve('constant', 'jmm3', %d)\n"
        "print(time.perf_counter() - t0, float(ms.T.sum()))\n" % M
    )
    out = {}
    for name, env_val in (("compiled", None), ("pure", "1")):
        env = dict(os.environ)
        env.pop("JETMARCH_PURE_PYTHON", None)
        if env_val:
            env["JETMARCH_PURE_PYTHON"] = env_val
        r = subprocess.run([sys.executable, "-c", code], env=env,
                           capture_output=True, text=True, check=True)
        dt, checksum = (float(t) for t in r.stdout.split())
        out[name] = (dt, checksum)
        print(f"  {name:9s} {dt:8.2f} s    (checksum {checksum:.9f})")
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--march-size", type=int, default=33)
    ap.add_argument("--solves", type=int, default=2000)
    args = ap.parse_args()

    impls = [n for n, _ in available_impls()]
    print(f"available kernel implementations: {impls}")

    print(f"\nsingle jmm3 triangle solves ({args.solves}x):")
    solves = bench_solves(args.solves)

    print(f"\nfull jmm3 march, constant problem, M={args.march_size}:")
    march = bench_march(args.march_size)

    if "compiled" in solves and "pure" in solves:
        print(f"\nspeedup (pure/compiled): "
              f"solves {solves['pure'] / solves['compiled']:.1f}x, "
              f"march {march['pure'][0] / march['compiled'][0]:.1f}x")
        if abs(march["pure"][1] - march["compiled"][1]) > 1e-9 * abs(march["pure"][1]):
            print("WARNING: march checksums differ between implementations")


if __name__ == "__main__":
    main()
