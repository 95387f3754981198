"""Engine cycle in the thermodynamic limit, density scans and phase maps.

The cycle holds N and L fixed, so every corner is pinned by its density; the
chemical potential is derived. The two isentropes are located by matching
the entropy density at fixed density.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EngineError, MatchingError
from .gibbs import CycleResult
from .tba import DEFAULT_GRID, GridConfig, ThermoState, _invert, thermo_state

MATCH_RTOL = 1e-11
MAX_EXPANSION = 2.0**10


@dataclass(frozen=True)
class TbaCycleSpec:
    c_A: float
    c_B: float
    T_A: float
    T_C: float
    density: float
    box_length: float = 1.0

    def __post_init__(self):
        if not (self.c_A > 0 and self.c_B > 0):
            raise ValueError("couplings must be positive")
        if not self.c_A <= self.c_B:
            raise ValueError("need c_A <= c_B")
        if not (0 < self.T_A < self.T_C):
            raise ValueError("need 0 < T_A < T_C")
        if not self.density > 0:
            raise ValueError("density must be positive")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")


@dataclass(frozen=True)
class CornerPoint:
    label: str
    coupling: float
    chemical_potential: float
    temperature: float
    entropy_density: float
    energy_density: float


@dataclass(frozen=True)
class PhaseMapPoint:
    """One (mu, T) cell; the observables are NaN and ``error`` is set when the cell failed."""

    chemical_potential: float
    temperature: float
    specific_heat: float
    density: float
    entropy_density: float
    error: Optional[str] = None


@dataclass(frozen=True)
class ScanRow:
    density: float
    efficiency: float
    work_per_particle: float
    error: Optional[str] = None


def default_threads() -> int:
    """Worker count from ``IDQHE_THREADS``; 1 when unset."""
    raw = os.environ.get("IDQHE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"IDQHE_THREADS must be an integer, got {raw!r}") from None
    if val < 1:
        raise ValueError("IDQHE_THREADS must be >= 1")
    return val


def _ordered_map(fn: Callable, items: Sequence, threads: Optional[int]) -> list:
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def state_at_density(c: float, n: float, T: float, grid: GridConfig = DEFAULT_GRID,
                     mu_guess: Optional[float] = None) -> ThermoState:
    """Equilibrium state at coupling c, density n and temperature T."""
    return _invert(c, n, T, grid, 1e-13, mu_guess, 100)[1]


def match_entropy_temperature(c_target: float, s_target: float, n: float, T_bracket,
                              grid: GridConfig = DEFAULT_GRID, rtol: float = MATCH_RTOL,
                              max_iter: int = 100) -> tuple[float, ThermoState]:
    """Temperature at which the entropy density at (c_target, n) equals ``s_target``.

    ``T_bracket`` is either a pair (lo, hi) or a reference temperature T0, in
    which case the search starts from [T0/3, 3 T0]. The bracket is widened
    geometrically up to a factor 2**10 on either side. Inside it, Newton steps
    with (ds/dT)_n = c_V/T are taken when they stay in the bracket, bisection
    otherwise.

    Returns
    -------
    (T, ThermoState)
        The temperature and the equilibrium state there.
    """
    if not s_target > 0:
        raise ValueError("target entropy must be positive")
    if np.ndim(T_bracket) == 0:
        lo, hi = float(T_bracket) / 3.0, 3.0 * float(T_bracket)
    else:
        lo, hi = (float(t) for t in T_bracket)
    if not 0 < lo < hi:
        raise ValueError("temperature bracket must satisfy 0 < lo < hi")
    lo0, hi0 = lo, hi

    guess = {"mu": None, "de": None}

    def evaluate(T):
        _, st, de = _invert(c_target, n, T, grid, 1e-13, guess["mu"], 100, guess["de"])
        guess["mu"] = st.chemical_potential
        guess["de"] = de
        return st

    st_lo = evaluate(lo)
    while st_lo.entropy_density > s_target:
        if lo <= lo0 / MAX_EXPANSION:
            raise MatchingError(f"entropy {s_target:g} lies below s(T={lo:g}) at c={c_target:g}, n={n:g}")
        hi, lo = lo, lo / 2.0
        st_lo = evaluate(lo)
    st_hi = evaluate(hi)
    while st_hi.entropy_density < s_target:
        if hi >= hi0 * MAX_EXPANSION:
            raise MatchingError(f"entropy {s_target:g} lies above s(T={hi:g}) at c={c_target:g}, n={n:g}")
        lo, st_lo = hi, st_hi
        hi *= 2.0
        st_hi = evaluate(hi)

    # start from the end point closer in entropy
    if abs(st_lo.entropy_density - s_target) < abs(st_hi.entropy_density - s_target):
        T, st = lo, st_lo
    else:
        T, st = hi, st_hi
    guess["mu"] = st.chemical_potential
    best = st
    for _ in range(max_iter):
        diff = st.entropy_density - s_target
        if abs(diff) < abs(best.entropy_density - s_target):
            best = st
        if abs(diff) <= rtol * s_target:
            return T, st
        if diff < 0:
            lo = T
        else:
            hi = T
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
        slope = st.heat_capacity / T
        step = T - diff / slope if slope > 0 else math.nan
        T = step if lo < step < hi else 0.5 * (lo + hi)
        st = evaluate(T)
    err = abs(best.entropy_density - s_target) / s_target
    if err <= rtol:
        return best.temperature, best
    raise MatchingError(
        f"entropy matching stalled at c={c_target:g}, n={n:g}: relative residual {err:.2e}",
        residual=err, iterations=max_iter,
    )


def _solve_cycle(spec: TbaCycleSpec, grid: GridConfig) -> tuple[CycleResult, tuple[CornerPoint, ...]]:
    n = spec.density
    st_A = state_at_density(spec.c_A, n, spec.T_A, grid)
    st_C = state_at_density(spec.c_B, n, spec.T_C, grid)
    if spec.c_A == spec.c_B:
        st_B, st_D = st_A, st_C
    else:
        _, st_B = match_entropy_temperature(spec.c_B, st_A.entropy_density, n, spec.T_A, grid)
        _, st_D = match_entropy_temperature(spec.c_A, st_C.entropy_density, n, spec.T_C, grid)
    L = spec.box_length
    Q2 = L * (st_C.energy_density - st_B.energy_density)
    Q4 = L * (st_D.energy_density - st_A.energy_density)
    if spec.c_A == spec.c_B:
        # identical isochores: the heats cancel exactly
        Q4 = Q2
    if Q2 > 0:
        result = CycleResult.from_heats(Q2, Q4, st_B.temperature, st_D.temperature)
    elif spec.c_A == spec.c_B:
        result = CycleResult(Q2, Q4, 0.0, 0.0, st_B.temperature, st_D.temperature)
    else:
        result = CycleResult.from_heats(Q2, Q4)
    corners = tuple(
        CornerPoint(label, st.coupling, st.chemical_potential, st.temperature, st.entropy_density, st.energy_density)
        for label, st in zip("ABCD", (st_A, st_B, st_C, st_D))
    )
    return result, corners


def run_tba_cycle(spec: TbaCycleSpec, grid: GridConfig = DEFAULT_GRID) -> CycleResult:
    """Four-stroke cycle of the infinite gas at fixed density.

    Q2 = L [E(c_B, T_C) - E(c_B, T_B)] and Q4 = L [E(c_A, T_D) - E(c_A, T_A)],
    with T_B, T_D fixed by s(c_A, T_A) = s(c_B, T_B) and s(c_B, T_C) = s(c_A, T_D).
    """
    return _solve_cycle(spec, grid)[0]


def cycle_trajectory(spec: TbaCycleSpec, grid: GridConfig = DEFAULT_GRID) -> list[CornerPoint]:
    """Corners A, B, C, D of the cycle in the (mu, T) plane."""
    return list(_solve_cycle(spec, grid)[1])


def density_scan(c_A: float, c_B: float, T_A: float, T_C: float, densities: Sequence[float],
                 box_length: float = 1.0, grid: GridConfig = DEFAULT_GRID,
                 threads: Optional[int] = None) -> list[ScanRow]:
    """One cycle per density; failed rows carry NaN and an error message.

    ``work_per_particle`` is W/(n L).
    """
    densities = [float(n) for n in densities]
    if any(not n > 0 for n in densities):
        raise ValueError("densities must be positive")
    if any(b < a for a, b in zip(densities, densities[1:])):
        raise ValueError("densities must be in ascending order")

    def row(n):
        try:
            res = run_tba_cycle(TbaCycleSpec(c_A, c_B, T_A, T_C, n, box_length), grid)
        except EngineError as exc:
            return ScanRow(n, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
        return ScanRow(n, res.efficiency, res.work / (n * box_length))

    return _ordered_map(row, densities, threads)


def phase_map(c: float, mu_values: Sequence[float], T_values: Sequence[float],
              grid: GridConfig = DEFAULT_GRID, threads: Optional[int] = None) -> list[PhaseMapPoint]:
    """Specific heat (fixed density) on a (mu, T) grid.

    Cells are ordered row-major with T outer and mu inner. A cell whose solve
    fails is kept with NaN observables and its error message.
    """
    if any(not T > 0 for T in T_values):
        raise ValueError("temperatures must be positive")
    cells = [(float(T), float(mu)) for T in T_values for mu in mu_values]

    def point(cell):
        T, mu = cell
        try:
            st = thermo_state(c, mu, T, grid)
        except EngineError as exc:
            return PhaseMapPoint(mu, T, math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
        return PhaseMapPoint(mu, T, st.heat_capacity, st.density, st.entropy_density)

    return _ordered_map(point, cells, threads)


def specific_heat_ridges(c: float, T: float, mu_values: Sequence[float],
                         grid: GridConfig = DEFAULT_GRID) -> list[float]:
    """Chemical potentials of the local maxima of c_V(mu) at fixed T.

    Each interior maximum on the sampled grid is refined by a parabola through
    its two neighbours.
    """
    mu = np.asarray(mu_values, dtype=float)
    if mu.size < 3 or np.any(np.diff(mu) <= 0):
        raise ValueError("need at least three strictly increasing mu values")
    cv = np.array([thermo_state(c, m, T, grid).heat_capacity for m in mu])
    out = []
    for i in range(1, mu.size - 1):
        if cv[i] > cv[i - 1] and cv[i] >= cv[i + 1]:
            x0, x1, x2 = mu[i - 1: i + 2]
            y0, y1, y2 = cv[i - 1: i + 2]
            den = (x0 - x1) * (x0 - x2) * (x1 - x2)
            a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
            b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den
            out.append(float(-b / (2 * a)) if a < 0 else float(x1))
    return out
