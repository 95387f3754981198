#!/usr/bin/env python3
"""Compare the numba and numpy variants of the hot kernels.

Both variants are called directly, so the result does not depend on
IDQHE_DISABLE_NUMBA. The first numba call (compilation) is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from idqhe import kernels
from idqhe._jit import NUMBA_ENABLED
from idqhe.bethe import quantum_numbers_up_to


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_bethe(n_particles, n_states, repeat):
    qns, _ = quantum_numbers_up_to(n_particles, 4 * n_particles**3, max_states=10**7)
    qn = np.array([q.values for q in qns[:n_states]], dtype=float)
    L, c = 1.0, 50.0
    k0 = np.pi * qn / (L + 2.0 * (n_particles - 1) / c)
    args = (qn, L, c, k0, 1e-12, 200)
    r_nb = kernels._bethe_newton_nb(*args)
    r_np = kernels._bethe_newton_np(*args)
    diff = float(np.max(np.abs(r_nb[0] - r_np[0])))
    t_nb = _best_of(lambda: kernels._bethe_newton_nb(*args), repeat)
    t_np = _best_of(lambda: kernels._bethe_newton_np(*args), repeat)
    return f"bethe_newton  N={n_particles} states={qn.shape[0]}", t_nb, t_np, diff


def bench_lorentz(size, repeat):
    x, w = np.polynomial.legendre.leggauss(size)
    k = 10.0 * (x + 1.0)
    w = 10.0 * w
    m_nb = kernels._lorentz_matrix_nb(k, k, w, 1.0)
    m_np = kernels._lorentz_matrix_np(k, k, w, 1.0)
    diff = float(np.max(np.abs(m_nb - m_np)))
    t_nb = _best_of(lambda: kernels._lorentz_matrix_nb(k, k, w, 1.0), repeat)
    t_np = _best_of(lambda: kernels._lorentz_matrix_np(k, k, w, 1.0), repeat)
    return f"lorentz_matrix size={size}", t_nb, t_np, diff


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--particles", type=int, default=5)
    p.add_argument("--states", type=int, default=2000)
    p.add_argument("--grid", type=int, default=800)
    args = p.parse_args(argv)
    if not NUMBA_ENABLED:
        print("note: numba disabled; the '*_nb' timings are plain Python")
    rows = [bench_bethe(args.particles, args.states, args.repeat), bench_lorentz(args.grid, args.repeat)]
    print(f"{'kernel':<40} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, t_nb, t_np, diff in rows:
        print(f"{name:<40} {1e3 * t_nb:11.3f} {1e3 * t_np:11.3f} {t_np / t_nb:8.2f} {diff:11.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
