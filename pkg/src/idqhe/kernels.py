"""Hot numeric kernels.

Each kernel exists twice: a numba version (``*_nb``) and a vectorised numpy
version (``*_np``). The public name is bound to one of them at import time
according to :data:`idqhe._jit.NUMBA_ENABLED`. Both variants are always
importable so they can be benchmarked and cross-checked against each other.
"""

import numpy as np

from ._jit import NUMBA_ENABLED, njit

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Bethe equations in a hard-wall box
#
#   F_i(k) = L k_i + sum_{j != i} [atan((k_i-k_j)/c) + atan((k_i+k_j)/c)] - pi I_i
#
# F is the gradient of a strictly convex action, so the Jacobian is symmetric
# positive definite and damped Newton converges from any start.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _bethe_residual_1(k, qn, L, c, out):
    n = k.shape[0]
    rmax = 0.0
    for i in range(n):
        acc = L * k[i] - np.pi * qn[i]
        for j in range(n):
            if j != i:
                acc += np.arctan((k[i] - k[j]) / c) + np.arctan((k[i] + k[j]) / c)
        out[i] = acc
        if abs(acc) > rmax:
            rmax = abs(acc)
    return rmax


@njit(cache=True)
def _bethe_newton_nb(qn, L, c, k0, tol, max_iter):
    n_states, n = qn.shape
    roots = k0.copy()
    resid = np.empty(n_states)
    iters = np.zeros(n_states, dtype=np.int64)
    F = np.empty(n)
    Ft = np.empty(n)
    J = np.empty((n, n))
    kt = np.empty(n)
    for s in range(n_states):
        k = roots[s]
        r = _bethe_residual_1(k, qn[s], L, c, F)
        it = 0
        while r > tol and it < max_iter:
            it += 1
            for i in range(n):
                diag = L
                for j in range(n):
                    if j != i:
                        dm = k[i] - k[j]
                        dp = k[i] + k[j]
                        a = c / (c * c + dm * dm)
                        b = c / (c * c + dp * dp)
                        diag += a + b
                        J[i, j] = b - a
                J[i, i] = diag
            # Gaussian elimination; SPD and diagonally dominant, no pivoting
            dk = F.copy()
            for p in range(n):
                piv = J[p, p]
                for i in range(p + 1, n):
                    m = J[i, p] / piv
                    if m != 0.0:
                        for j in range(p, n):
                            J[i, j] -= m * J[p, j]
                        dk[i] -= m * dk[p]
            for i in range(n - 1, -1, -1):
                acc = dk[i]
                for j in range(i + 1, n):
                    acc -= J[i, j] * dk[j]
                dk[i] = acc / J[i, i]
            t = 1.0
            accepted = False
            while t > 1e-6:
                for i in range(n):
                    kt[i] = k[i] - t * dk[i]
                rt = _bethe_residual_1(kt, qn[s], L, c, Ft)
                if rt < r:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                break
            for i in range(n):
                k[i] = kt[i]
                F[i] = Ft[i]
            r = rt
        resid[s] = r
        iters[s] = it
    return roots, resid, iters


def _bethe_residual_np(k, qn, L, c):
    dm = k[:, :, None] - k[:, None, :]
    dp = k[:, :, None] + k[:, None, :]
    terms = np.arctan(dm / c) + np.arctan(dp / c)
    # drop the j == i entries: atan(0) + atan(2 k_i / c)
    return L * k - np.pi * qn + terms.sum(axis=2) - np.arctan(2.0 * k / c)


def _bethe_jacobian_np(k, L, c):
    dm = k[:, :, None] - k[:, None, :]
    dp = k[:, :, None] + k[:, None, :]
    a = c / (c * c + dm * dm)
    b = c / (c * c + dp * dp)
    J = b - a
    n = k.shape[1]
    idx = np.arange(n)
    self_terms = a[:, idx, idx] + b[:, idx, idx]
    J[:, idx, idx] = L + (a + b).sum(axis=2) - self_terms
    return J


def _bethe_newton_np(qn, L, c, k0, tol, max_iter):
    roots = np.array(k0, dtype=float, copy=True)
    n_states = roots.shape[0]
    F = _bethe_residual_np(roots, qn, L, c)
    resid = np.abs(F).max(axis=1)
    iters = np.zeros(n_states, dtype=np.int64)
    stalled = np.zeros(n_states, dtype=bool)
    for _ in range(max_iter):
        active = np.flatnonzero((resid > tol) & ~stalled)
        if active.size == 0:
            break
        k = roots[active]
        dk = np.linalg.solve(_bethe_jacobian_np(k, L, c), F[active][..., None])[..., 0]
        iters[active] += 1
        t = np.ones(active.size)
        pending = np.ones(active.size, dtype=bool)
        new_k = k.copy()
        new_F = F[active].copy()
        new_r = resid[active].copy()
        while pending.any():
            sel = np.flatnonzero(pending)
            kt = k[sel] - t[sel, None] * dk[sel]
            Ft = _bethe_residual_np(kt, qn[active[sel]], L, c)
            rt = np.abs(Ft).max(axis=1)
            ok = rt < resid[active[sel]]
            good = sel[ok]
            new_k[good] = kt[ok]
            new_F[good] = Ft[ok]
            new_r[good] = rt[ok]
            pending[good] = False
            t[sel[~ok]] *= 0.5
            give_up = sel[~ok][t[sel[~ok]] <= 1e-6]
            pending[give_up] = False
            stalled[active[give_up]] = True
        roots[active] = new_k
        F[active] = new_F
        resid[active] = new_r
    return roots, resid, iters


# ---------------------------------------------------------------------------
# Yang-Yang kernel on the positive half-line
#
#   A_ij = w_j / (2 pi) * [2c/(c^2+(k_i-q_j)^2) + 2c/(c^2+(k_i+q_j)^2)]
#
# so that (1/2pi) int_{-inf}^{inf} K(k-q) g(q) dq = A @ g for even g.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _lorentz_matrix_nb(k, q, w, c):
    out = np.empty((k.shape[0], q.shape[0]))
    cc = c * c
    for i in range(k.shape[0]):
        for j in range(q.shape[0]):
            dm = k[i] - q[j]
            dp = k[i] + q[j]
            out[i, j] = w[j] * (c / (cc + dm * dm) + c / (cc + dp * dp)) / np.pi
    return out


def _lorentz_matrix_np(k, q, w, c):
    dm = k[:, None] - q[None, :]
    dp = k[:, None] + q[None, :]
    cc = c * c
    return w[None, :] * (c / (cc + dm * dm) + c / (cc + dp * dp)) / np.pi


if NUMBA_ENABLED:
    bethe_newton = _bethe_newton_nb
    lorentz_matrix = _lorentz_matrix_nb
else:
    bethe_newton = _bethe_newton_np
    lorentz_matrix = _lorentz_matrix_np


def bethe_residual(roots, qn, L, c):
    """Componentwise Bethe-equation residue for a stack of root vectors."""
    roots = np.atleast_2d(np.asarray(roots, dtype=float))
    qn = np.atleast_2d(np.asarray(qn, dtype=float))
    return _bethe_residual_np(roots, qn, float(L), float(c))
