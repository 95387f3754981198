"""Yang-Yang thermodynamics of the Lieb-Liniger gas.

The dressed energy solves

    eps(k) = k^2 - mu - (T / 2 pi) int 2c / (c^2 + (k-q)^2) ln(1 + exp(-eps(q)/T)) dq

and the pressure is p = (T / 2 pi) int ln(1 + exp(-eps(k)/T)) dk. Density and
entropy come from implicit differentiation of the same equation, which also
gives the full Hessian of p in (mu, T) at the cost of three extra
back-substitutions.

Quadrature is composite Gauss-Legendre on [0, K] (eps is even). Panels are
split adaptively until the occupation functions are resolved, which matters
at low T where the Fermi edge has width ~ T / |eps'|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq
from scipy.special import erfcx, expit

from . import kernels
from .errors import GridError, InversionError, SolverError


@dataclass(frozen=True)
class GridConfig:
    """Quadrature and solver settings for the dressed-energy equation.

    Attributes
    ----------
    nodes_per_panel
        Gauss-Legendre order on every panel.
    cutoff
        Momentum cutoff K. ``None`` picks K so that eps(K)/T >= ``tail``.
        An explicit cutoff that violates the tail condition raises GridError.
    tail
        Required eps(K)/T at the cutoff.
    quad_tol
        Relative accuracy target for the adaptive panel refinement.
    panel_width
        Largest panel width in units of c (the kernel has poles at +-ic).
    tol
        Sup-norm tolerance on the dressed energy, scaled by max(1, |mu|, T).
    """

    nodes_per_panel: int = 16
    cutoff: Optional[float] = None
    tail: float = 40.0
    quad_tol: float = 1e-13
    panel_width: float = 1.5
    tol: float = 1e-12
    max_iter: int = 200
    max_refine: int = 8
    max_depth: int = 48
    max_panels: int = 2000

    def as_dict(self) -> dict:
        return {
            "nodes_per_panel": self.nodes_per_panel,
            "cutoff": self.cutoff,
            "tail": self.tail,
            "quad_tol": self.quad_tol,
            "panel_width": self.panel_width,
            "tol": self.tol,
        }


DEFAULT_GRID = GridConfig()


@lru_cache(maxsize=None)
def _legendre(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def _panel_nodes(edges: np.ndarray, m: int):
    x, w = _legendre(m)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x[None, :]).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def log1p_exp_neg(y):
    """ln(1 + exp(-y)) without overflow."""
    return np.logaddexp(0.0, -y)


def fermi(y):
    """1 / (1 + exp(y)) without overflow."""
    return expit(-y)


@dataclass(frozen=True)
class DressedEnergy:
    """Converged solution of the dressed-energy equation.

    ``grid``, ``values`` and ``quadrature_weights`` cover the symmetric node
    set on [-K, K]; ``nodes``/``weights``/``eps`` are the positive half used
    for all computation.
    """

    coupling: float
    chemical_potential: float
    temperature: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    eps: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    residual: float
    iterations: int
    cutoff: float

    @property
    def grid(self) -> np.ndarray:
        return np.concatenate([-self.nodes[::-1], self.nodes])

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([self.eps[::-1], self.eps])

    @property
    def quadrature_weights(self) -> np.ndarray:
        return np.concatenate([self.weights[::-1], self.weights])

    def __call__(self, k) -> np.ndarray:
        """Nystrom interpolation of eps at arbitrary momenta."""
        k = np.abs(np.atleast_1d(np.asarray(k, dtype=float)))
        return _nystrom(k, self.nodes, self.weights, self.eps, self.coupling,
                        self.chemical_potential, self.temperature)


def _nystrom(k, nodes, weights, eps, c, mu, T):
    A = kernels.lorentz_matrix(k, nodes, weights, c)
    return k * k - mu - T * (A @ log1p_exp_neg(eps / T))


def _newton(nodes, weights, c, mu, T, eps0, tol, max_iter):
    """Newton iteration for eps on fixed nodes; returns eps, LU of the Jacobian, residual, iterations."""
    A = kernels.lorentz_matrix(nodes, nodes, weights, c)
    drive = nodes * nodes - mu
    eps = eps0.copy()
    scale = max(1.0, abs(mu), T)
    n = nodes.size
    for it in range(1, max_iter + 1):
        y = eps / T
        R = eps - drive + T * (A @ log1p_exp_neg(y))
        J = np.eye(n) - A * fermi(y)[None, :]
        step = np.linalg.solve(J, R)
        eps = eps - step
        if np.max(np.abs(step)) <= tol * scale:
            y = eps / T
            R = eps - drive + T * (A @ log1p_exp_neg(y))
            J = np.eye(n) - A * fermi(y)[None, :]
            return eps, A, lu_factor(J), float(np.max(np.abs(R))), it
    raise SolverError(
        f"dressed-energy Newton iteration did not converge in {max_iter} steps "
        f"(c={c:g}, mu={mu:g}, T={T:g}, last step {np.max(np.abs(step)):.3e})",
        residual=float(np.max(np.abs(step))),
        iterations=max_iter,
    )


def _test_functions(eps, T):
    y = eps / T
    th = fermi(y)
    return np.stack([log1p_exp_neg(y), th, th * (1.0 - th)])


def _refine(edges, nodes, weights, eps, c, mu, T, cfg: GridConfig, K: float):
    """Split panels until the occupation functions are integrated to quad_tol.

    Errors are measured against a running estimate of each total, refreshed
    every level, since a coarse grid can miss a sharp Fermi edge entirely.
    """
    m = cfg.nodes_per_panel
    x, w = _legendre(m)
    g_nodes = _test_functions(eps, T)
    # eps carries roundoff ~ machine eps * its magnitude; ratios eps/T amplify it
    noise = 200.0 * np.finfo(float).eps * max(abs(mu), K * K, T) / T
    tol = max(cfg.quad_tol, noise)
    min_width = 1e-13 * K
    width_cap = cfg.panel_width * c
    todo_a = edges[:-1]
    todo_b = edges[1:]
    todo_coarse = (g_nodes * weights[None, :]).reshape(3, todo_a.size, m).sum(axis=2)
    final = []
    done_sum = np.zeros(3)
    depth = 0
    while todo_a.size:
        mid = 0.5 * (todo_a + todo_b)
        lo = np.stack([todo_a, mid], axis=1).ravel()
        hi = np.stack([mid, todo_b], axis=1).ravel()
        half = 0.5 * (hi - lo)[:, None]
        cn = (0.5 * (lo + hi)[:, None] + half * x[None, :]).ravel()
        cw = (half * w[None, :]).ravel()
        ce = _nystrom(cn, nodes, weights, eps, c, mu, T)
        cg = (_test_functions(ce, T) * cw[None, :]).reshape(3, -1, m).sum(axis=2)
        fine = cg[:, 0::2] + cg[:, 1::2]
        totals = np.abs(done_sum + fine.sum(axis=1)) + 1e-300
        width = todo_b - todo_a
        frac = np.maximum(width / K, 1e-3)
        err = np.abs(fine - todo_coarse) / (totals[:, None] * frac[None, :])
        split = (err > tol).any(axis=0) | (width > width_cap)
        split &= width > min_width
        if depth >= cfg.max_depth:
            split[:] = False
        keep = ~split
        final.extend(zip(todo_a[keep], todo_b[keep]))
        done_sum += fine[:, keep].sum(axis=1)
        s_idx = np.flatnonzero(split)
        if len(final) + 2 * s_idx.size > cfg.max_panels:
            raise GridError(f"adaptive grid exceeded {cfg.max_panels} panels (c={c:g}, mu={mu:g}, T={T:g})")
        todo_a = np.concatenate([todo_a[s_idx], mid[s_idx]])
        todo_b = np.concatenate([mid[s_idx], todo_b[s_idx]])
        todo_coarse = np.concatenate([cg[:, 0::2][:, s_idx], cg[:, 1::2][:, s_idx]], axis=1)
        depth += 1
    final.sort()
    return np.array([final[0][0]] + [b for _, b in final])


def _initial_edges(K, c, cfg):
    width = min(cfg.panel_width * c, K / 4.0)
    count = max(4, int(math.ceil(K / width)))
    return np.linspace(0.0, K, count + 1)


def solve_dressed_energy(c: float, mu: float, T: float, grid: GridConfig = DEFAULT_GRID,
                         warm: Optional[DressedEnergy] = None) -> DressedEnergy:
    """Solve the dressed-energy equation at (c, mu, T) on an adaptively refined grid.

    ``warm`` is a nearby solution at the same coupling; its grid and dressed
    energy seed the first Newton pass. The result does not depend on it
    beyond solver tolerance.
    """
    if not c > 0:
        raise ValueError("coupling must be positive")
    if not T > 0:
        raise ValueError("temperature must be positive")
    c = float(c)
    mu = float(mu)
    T = float(T)
    auto = grid.cutoff is None
    K = grid.cutoff if not auto else math.sqrt(max(mu, 0.0) + grid.tail * T) * 1.05
    seed = None
    # a seed grid is only worth reusing if it is not much larger than a fresh one
    if (warm is not None and warm.coupling == c
            and (not auto or K <= warm.cutoff <= 1.25 * K)
            and warm.edges.size <= 2 * _initial_edges(warm.cutoff, c, grid).size):
        K = warm.cutoff
        seed = (warm.edges, warm.nodes, warm.weights, warm.eps + (warm.chemical_potential - mu))
    for _ in range(20):
        if seed is not None:
            edges, nodes, weights, eps0 = seed
            seed = None
        else:
            edges = _initial_edges(K, c, grid)
            nodes, weights = _panel_nodes(edges, grid.nodes_per_panel)
            eps0 = nodes * nodes - mu
        eps, A, lu, resid, total_iter = _newton(nodes, weights, c, mu, T, eps0, grid.tol, grid.max_iter)
        eps_K = float(_nystrom(np.array([K]), nodes, weights, eps, c, mu, T)[0])
        if eps_K / T >= grid.tail:
            break
        if not auto:
            raise GridError(
                f"cutoff K={K:g} too small: eps(K)/T = {eps_K / T:.3g} < {grid.tail:g}; use a larger cutoff"
            )
        K = math.sqrt(K * K + 1.1 * (grid.tail * T - eps_K) + T)
    else:
        raise GridError(f"could not find a cutoff satisfying the tail condition (c={c:g}, mu={mu:g}, T={T:g})")
    for _ in range(grid.max_refine):
        new_edges = _refine(edges, nodes, weights, eps, c, mu, T, grid, K)
        if new_edges.size == edges.size:
            break
        new_nodes, new_weights = _panel_nodes(new_edges, grid.nodes_per_panel)
        eps = _nystrom(new_nodes, nodes, weights, eps, c, mu, T)
        edges, nodes, weights = new_edges, new_nodes, new_weights
        eps, A, lu, resid, it = _newton(nodes, weights, c, mu, T, eps, grid.tol, grid.max_iter)
        total_iter += it
    else:
        raise GridError(f"adaptive grid did not settle after {grid.max_refine} passes (c={c:g}, mu={mu:g}, T={T:g})")
    eps_K = float(_nystrom(np.array([K]), nodes, weights, eps, c, mu, T)[0])
    if eps_K / T < grid.tail:
        raise GridError(f"tail condition lost after refinement: eps(K)/T = {eps_K / T:.3g} (c={c:g}, mu={mu:g}, T={T:g})")
    de = DressedEnergy(c, mu, T, nodes, weights, eps, edges, resid, total_iter, K)
    object.__setattr__(de, "_cache", (A, lu))
    return de


# ---------------------------------------------------------------------------
# Thermodynamics
# ---------------------------------------------------------------------------


def _tail(mu, T, K):
    """Gaussian tail of the pressure beyond |k| > K and its (mu, T) gradient."""
    pref = T**1.5 / (2.0 * math.sqrt(math.pi))
    damp = math.exp((mu - K * K) / T)
    pt = pref * float(erfcx(K / math.sqrt(T))) * damp
    nt = pt / T
    st = pt * (1.5 / T - mu / T**2) + K / (2.0 * math.pi) * damp
    return pt, nt, st


def pressure(de: DressedEnergy) -> float:
    """p = (T/2pi) int ln(1 + exp(-eps/T)) dk, including the analytic tail beyond K."""
    T = de.temperature
    g = T * log1p_exp_neg(de.eps / T)
    return float(de.weights @ g) / math.pi + _tail(de.chemical_potential, T, de.cutoff)[0]


@dataclass(frozen=True)
class ThermoState:
    """Equilibrium point (c, mu, T) of the Yang-Yang gas.

    The ``d*`` fields are second derivatives of the pressure, obtained by
    implicit differentiation: dn_dmu = p_mumu, dn_dT = ds_dmu = p_muT,
    ds_dT = p_TT (all at fixed mu or T, not fixed density).
    """

    coupling: float
    chemical_potential: float
    temperature: float
    pressure: float
    density: float
    entropy_density: float
    energy_density: float
    dn_dmu: float
    dn_dT: float
    ds_dT: float

    @property
    def heat_capacity(self) -> float:
        """T (ds/dT) at fixed density, from the analytic Hessian."""
        return self.temperature * (self.ds_dT - self.dn_dT**2 / self.dn_dmu)


def _derivatives(de: DressedEnergy):
    """Return p, gradient (n, s) and Hessian (p_mumu, p_muT, p_TT)."""
    A, lu = de._cache
    T = de.temperature
    eps = de.eps
    w = de.weights
    y = eps / T
    th = fermi(y)
    f = log1p_exp_neg(y)
    h = th * (1.0 - th) / T
    g_T = f + y * th
    e_mu = lu_solve(lu, -np.ones_like(eps))
    e_T = lu_solve(lu, -(A @ g_T))
    u_mu = e_mu
    u_T = e_T - y
    rhs = -np.stack([h * u_mu * u_mu, h * u_mu * u_T, h * u_T * u_T], axis=1)
    second = lu_solve(lu, A @ rhs)
    pt, nt, st = _tail(de.chemical_potential, T, de.cutoff)
    p = float(w @ (T * f)) / math.pi + pt
    n = float(w @ (-th * e_mu)) / math.pi + nt
    s = float(w @ (-th * e_T + g_T)) / math.pi + st
    hess = [
        float(w @ (-th * second[:, 0] + h * u_mu * u_mu)) / math.pi,
        float(w @ (-th * second[:, 1] + h * u_mu * u_T)) / math.pi,
        float(w @ (-th * second[:, 2] + h * u_T * u_T)) / math.pi,
    ]
    return p, n, s, hess, e_mu


def thermo_state(c: float, mu: float, T: float, grid: GridConfig = DEFAULT_GRID) -> ThermoState:
    """Pressure, density, entropy and energy density at (c, mu, T).

    The energy density is assembled from the identity E = -p + mu n + T s.
    """
    return _thermo(c, mu, T, grid)[0]


def _thermo(c, mu, T, grid, warm=None):
    de = solve_dressed_energy(c, mu, T, grid, warm)
    p, n, s, hess, _ = _derivatives(de)
    E = -p + mu * n + T * s
    return ThermoState(float(c), float(mu), float(T), p, n, s, E, hess[0], hess[1], hess[2]), de


def energy_density_direct(de: DressedEnergy) -> float:
    """Energy density int k^2 rho(k) dk from the root and hole densities.

    Independent of the thermodynamic identity; used as a consistency check.
    The total density of states is 2 pi (rho + rho_h) = -d eps/d mu.
    """
    _, _, _, _, e_mu = _derivatives(de)
    th = fermi(de.eps / de.temperature)
    return float(de.weights @ (-(de.nodes**2) * th * e_mu)) / math.pi


def _tg_density(mu, T):
    # free fermions: n = (1/2pi) int dk / (1 + exp((k^2 - mu)/T))
    K = math.sqrt(max(mu, 0.0) + 50.0 * T)
    edges = np.linspace(0.0, K, 9)
    nodes, weights = _panel_nodes(edges, 64)
    return float(weights @ fermi((nodes * nodes - mu) / T)) / math.pi


def _tg_mu(n, T):
    """Chemical potential of free fermions at density n; an upper bound for c < inf."""
    lo = T * math.log(2.0 * math.sqrt(math.pi) * n / math.sqrt(T)) - T
    hi = max((math.pi * n) ** 2, lo) + T
    while _tg_density(lo, T) > n:
        lo -= 2.0 * (hi - lo)
    while _tg_density(hi, T) < n:
        hi += 2.0 * (hi - lo)
    return brentq(lambda m: _tg_density(m, T) - n, lo, hi, xtol=1e-10 * max(T, 1.0))


def mu_from_density(c: float, n_target: float, T: float, grid: GridConfig = DEFAULT_GRID,
                    rtol: float = 1e-12, mu_guess: Optional[float] = None,
                    max_iter: int = 100) -> float:
    """Chemical potential at which the density equals ``n_target``.

    Safeguarded Newton on n(mu), with dn/dmu from the analytic Hessian. The
    default start is the smaller of the free-fermion and mean-field values.
    """
    return invert_density(c, n_target, T, grid, rtol, mu_guess, max_iter)[0]


def invert_density(c, n_target, T, grid=DEFAULT_GRID, rtol=1e-12, mu_guess=None, max_iter=100):
    """Like :func:`mu_from_density` but also returns the ThermoState at the solution."""
    mu, st, _ = _invert(c, n_target, T, grid, rtol, mu_guess, max_iter)
    return mu, st


def _invert(c, n_target, T, grid, rtol, mu_guess, max_iter, warm=None):
    if not n_target > 0:
        raise ValueError("target density must be positive")
    if mu_guess is None:
        # free fermions and mean field (mu = 2 c n) both bound mu from above
        mu = min(_tg_mu(n_target, T), 2.0 * c * n_target)
    else:
        mu = float(mu_guess)
    lo = hi = None
    step = max(T, 1e-3 * abs(mu))
    best = None
    prev = math.inf
    for _ in range(max_iter):
        st, warm = _thermo(c, mu, T, grid, warm)
        diff = st.density - n_target
        if best is None or abs(diff) < abs(best.density - n_target):
            best = st
        if abs(diff) <= rtol * n_target:
            return mu, st, warm
        if diff < 0:
            lo = mu
        else:
            hi = mu
        newton = mu - diff / st.dn_dmu if st.dn_dmu > 0 else math.nan
        if lo is not None and hi is not None:
            if hi - lo <= 8 * np.finfo(float).eps * max(1.0, abs(lo), abs(hi)):
                return best.chemical_potential, best, warm
            slow = abs(diff) > 0.5 * prev
            mu = newton if (lo < newton < hi and not slow) else 0.5 * (lo + hi)
        elif diff < 0:
            # n ~ exp(mu/T) when dilute: cap the step by the classical estimate
            cap = mu + step + (T * math.log(n_target / st.density) if st.density > 0 else 0.0)
            mu = min(newton, cap) if math.isfinite(newton) else cap
            step *= 2.0
        else:
            # from above, Newton cannot overshoot by more than about T in the dilute regime
            mu = newton if math.isfinite(newton) else mu - step
            step *= 2.0
        prev = abs(diff)
    raise InversionError(
        f"density inversion did not converge for n={n_target:g} (c={c:g}, T={T:g})",
        residual=abs(best.density - n_target) / n_target,
        iterations=max_iter,
    )


def specific_heat(c: float, mu: float, T: float, grid: GridConfig = DEFAULT_GRID,
                  fixed: str = "density") -> float:
    """Heat capacity per unit length by central finite differences.

    ``fixed="density"`` gives c_V = T (ds/dT)_n, evaluated in T-mu coordinates
    as T [s_T - (n_T)^2 / n_mu]; ``fixed="mu"`` gives T (ds/dT)_mu. The step
    is h = max(1e-4, 1e-3 T), capped at T/4.
    """
    if fixed not in ("density", "mu"):
        raise ValueError("fixed must be 'density' or 'mu'")
    h = min(max(1e-4, 1e-3 * T), 0.25 * T)
    up = thermo_state(c, mu, T + h, grid)
    dn = thermo_state(c, mu, T - h, grid)
    s_T = (up.entropy_density - dn.entropy_density) / (2 * h)
    if fixed == "mu":
        return T * s_T
    n_T = (up.density - dn.density) / (2 * h)
    right = thermo_state(c, mu + h, T, grid)
    left = thermo_state(c, mu - h, T, grid)
    n_mu = (right.density - left.density) / (2 * h)
    return T * (s_T - n_T * n_T / n_mu)
