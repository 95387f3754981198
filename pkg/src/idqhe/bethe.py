"""Finite-N Lieb-Liniger gas in a hard-wall box.

Units are hbar = 2m = k_B = 1 throughout; energies are E = sum_i k_i**2.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ResourceError, SolverError, UnsupportedLimitError

DEFAULT_TOL = 1e-12
DEFAULT_CUTOFF = 1e-8
DEFAULT_MAX_STATES = 10**6
DEFAULT_MAX_ITER = 200


@dataclass(frozen=True)
class GasSpec:
    """Working substance: N bosons on a box of length L with coupling c."""

    particle_count: int
    box_length: float = 1.0
    coupling: float = 0.0

    def __post_init__(self):
        if int(self.particle_count) != self.particle_count or self.particle_count < 1:
            raise ValueError(f"particle_count must be a positive integer, got {self.particle_count!r}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        if not self.coupling >= 0:
            raise ValueError(f"coupling must be non-negative, got {self.coupling!r}")
        object.__setattr__(self, "particle_count", int(self.particle_count))
        object.__setattr__(self, "box_length", float(self.box_length))
        object.__setattr__(self, "coupling", float(self.coupling))

    @property
    def density(self) -> float:
        return self.particle_count / self.box_length

    def with_coupling(self, coupling: float) -> "GasSpec":
        return replace(self, coupling=coupling)


@dataclass(frozen=True, order=True)
class QuantumNumbers:
    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals:
            raise ValueError("quantum numbers must be non-empty")
        if vals[0] < 1 or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"quantum numbers must be strictly increasing positive integers, got {vals}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def ground(cls, n: int) -> "QuantumNumbers":
        return cls(tuple(range(1, n + 1)))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def free_fermion_key(self) -> int:
        """Sum of squared quantum numbers, the Tonks-Girardeau energy in units of (pi/L)**2."""
        return sum(v * v for v in self.values)


@dataclass(frozen=True)
class BetheState:
    quantum_numbers: QuantumNumbers
    roots: np.ndarray = field(compare=False, repr=False)
    energy: float
    residual: float
    coupling: float

    def __post_init__(self):
        self.roots.setflags(write=False)


def strong_coupling_factor(spec: GasSpec) -> float:
    """Return lambda_c = 1 - 4(N-1)/(cL) + 12(N-1)^2/(cL)^2."""
    if not spec.coupling > 0:
        raise UnsupportedLimitError("strong-coupling factor needs coupling > 0")
    x = (spec.particle_count - 1) / (spec.coupling * spec.box_length)
    return 1.0 - 4.0 * x + 12.0 * x * x


def strong_coupling_energy(qn: QuantumNumbers, spec: GasSpec) -> float:
    """Strong-coupling eigenvalue (pi^2 lambda_c / L^2) sum I_i^2.

    Only accurate when c >> pi N / L; this is not checked.
    """
    lam = strong_coupling_factor(spec)
    return math.pi**2 * lam / spec.box_length**2 * qn.free_fermion_key


def _initial_roots(qn: np.ndarray, L: float, c: float, n: int) -> np.ndarray:
    return np.pi * qn / (L + 2.0 * (n - 1) / c)


def _solve_array(qn: np.ndarray, spec: GasSpec, tol: float, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    """Solve a (S, N) stack of quantum numbers; returns roots and residuals."""
    c = spec.coupling
    L = spec.box_length
    n = qn.shape[1]
    if not c > 0:
        raise UnsupportedLimitError(
            "coupling = 0 makes the Bethe roots coalesce; use the free-boson spectrum instead"
        )
    if n == 1:
        roots = np.pi * qn / L
        return roots, np.abs(L * roots - np.pi * qn).max(axis=1)
    # continuation from c = 10 N / L downward keeps the start inside the basin
    c_start = 10.0 * n / L
    if c < n / L:
        steps = int(math.ceil(math.log(c_start / c) / math.log(2.0)))
        couplings = list(c_start * (c / c_start) ** (np.arange(steps + 1) / steps))
    else:
        couplings = [c]
    roots = _initial_roots(qn, L, couplings[0], n)
    for cc in couplings[:-1]:
        roots, _, _ = kernels.bethe_newton(qn, L, cc, roots, max(tol, 1e-9), max_iter)
    roots, resid, _ = kernels.bethe_newton(qn, L, c, roots, tol, max_iter)
    return roots, resid


def _states_from_arrays(qns: Sequence[QuantumNumbers], roots, resid, spec, tol) -> list[BetheState]:
    bad = np.flatnonzero(~(resid <= tol))
    if bad.size:
        i = int(bad[0])
        raise SolverError(
            f"Bethe roots for I={qns[i].values} at c={spec.coupling:g} did not converge "
            f"(residual {resid[i]:.3e} > {tol:.1e})",
            residual=float(resid[i]),
        )
    out = []
    for q, k, r in zip(qns, roots, resid):
        k = np.array(k)
        out.append(BetheState(q, k, float(np.sum(k * k)), float(r), spec.coupling))
    return out


def solve_bethe_roots(qn: QuantumNumbers, spec: GasSpec, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> BetheState:
    """Solve the logarithmic Bethe equations for one set of quantum numbers."""
    if len(qn) != spec.particle_count:
        raise ValueError(f"{len(qn)} quantum numbers for {spec.particle_count} particles")
    if not tol > 0:
        raise ValueError("tol must be positive")
    arr = np.array([qn.values], dtype=float)
    roots, resid = _solve_array(arr, spec, tol, max_iter)
    return _states_from_arrays([qn], roots, resid, spec, tol)[0]


def solve_many(qns: Sequence[QuantumNumbers], spec: GasSpec, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> list[BetheState]:
    """Solve a batch of quantum-number sets at the coupling of ``spec`` (order preserved)."""
    qns = list(qns)
    if not qns:
        return []
    arr = np.array([q.values for q in qns], dtype=float)
    if arr.shape[1] != spec.particle_count:
        raise ValueError("quantum-number length does not match particle_count")
    roots, resid = _solve_array(arr, spec, tol, max_iter)
    return _states_from_arrays(qns, roots, resid, spec, tol)


def _successors(values: tuple[int, ...]) -> Iterable[tuple[int, ...]]:
    n = len(values)
    for i in range(n):
        if i == n - 1 or values[i] + 1 < values[i + 1]:
            yield values[:i] + (values[i] + 1,) + values[i + 1:]


def quantum_numbers_up_to(n: int, key_limit: float, max_states: int = DEFAULT_MAX_STATES):
    """Best-first enumeration of strictly increasing tuples with sum I^2 <= key_limit.

    Returns ``(inside, frontier)``: the tuples within the limit in ascending key
    order, and the successors that fall just outside it.
    """
    start = tuple(range(1, n + 1))
    heap = [(sum(v * v for v in start), start)]
    seen = {start}
    inside = []
    frontier = []
    while heap:
        key, vals = heapq.heappop(heap)
        inside.append(vals)
        if len(inside) > max_states:
            raise ResourceError(
                f"state enumeration exceeded the cap of {max_states} states", count=len(inside)
            )
        for nxt in _successors(vals):
            if nxt in seen:
                continue
            seen.add(nxt)
            k = key + sum(a * a - b * b for a, b in zip(nxt, vals))
            if k <= key_limit:
                heapq.heappush(heap, (k, nxt))
            else:
                frontier.append(nxt)
    frontier.sort(key=lambda v: (sum(x * x for x in v), v))
    return [QuantumNumbers(v) for v in inside], [QuantumNumbers(v) for v in frontier]


def screening_factor(spec: GasSpec, ground: BetheState) -> float:
    """Rescaling of the free-fermion gaps used to bound Boltzmann weights.

    This is lambda_c, clipped by the exact ground-state energy ratio so the
    bound stays conservative where the 1/c expansion fails.
    """
    n = spec.particle_count
    tg0 = math.pi**2 / spec.box_length**2 * (n * (n + 1) * (2 * n + 1) / 6.0)
    return min(1.0, strong_coupling_factor(spec), ground.energy / tg0)


def enumerate_states(spec: GasSpec, temperature: float, weight_cutoff: float = DEFAULT_CUTOFF,
                     tol: float = DEFAULT_TOL, max_states: int = DEFAULT_MAX_STATES,
                     screening: float | None = None) -> list[BetheState]:
    """Low-energy eigenstates whose Boltzmann weight relative to the ground state exceeds the cutoff.

    Candidate quantum numbers are screened with the strong-coupling spectrum.
    Every returned state carries exactly solved roots. The frontier just
    outside the screened set is solved too, and the screen is widened until
    no frontier state has an exact relative weight above ``weight_cutoff``.

    Parameters
    ----------
    screening
        Override for the gap rescaling factor; the default is
        :func:`screening_factor`. Smaller values admit more states.

    Returns
    -------
    list of BetheState
        Sorted by energy, ground state first.
    """
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    if not 0 < weight_cutoff < 1:
        raise ValueError("weight_cutoff must lie in (0, 1)")
    n = spec.particle_count
    L = spec.box_length
    ground = solve_bethe_roots(QuantumNumbers.ground(n), spec, tol)
    lam = screening if screening is not None else screening_factor(spec, ground)
    span = -math.log(weight_cutoff) * temperature
    key0 = n * (n + 1) * (2 * n + 1) // 6
    while True:
        key_limit = key0 + span * L**2 / (math.pi**2 * lam)
        inside, frontier = quantum_numbers_up_to(n, key_limit, max_states)
        if frontier:
            edge = solve_many(frontier, spec, tol)
            worst = min(s.energy for s in edge) - ground.energy
            if worst < span:
                lam *= 0.5
                continue
        break
    states = solve_many(inside, spec, tol)
    states.sort(key=lambda s: (s.energy, s.quantum_numbers.values))
    return states
