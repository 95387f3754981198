"""Canonical ensembles over Bethe states and the finite-N interaction-driven cycle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bethe import (
    DEFAULT_CUTOFF,
    DEFAULT_TOL,
    BetheState,
    GasSpec,
    enumerate_states,
    screening_factor,
    solve_bethe_roots,
    solve_many,
    strong_coupling_factor,
    QuantumNumbers,
)
from .errors import NotAnEngineError


@dataclass(frozen=True)
class GibbsEnsemble:
    """Boltzmann populations of a fixed list of eigenstates.

    ``partition_function`` is referenced to the lowest stored energy,
    Z = sum_n exp(-(e_n - e_min)/T), so it stays finite at any T. The
    absolute value is ``exp(log_partition_function)``.
    """

    states: tuple[BetheState, ...]
    temperature: float
    probabilities: np.ndarray
    partition_function: float
    reference_energy: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    @property
    def log_partition_function(self) -> float:
        return math.log(self.partition_function) - self.reference_energy / self.temperature


def gibbs_ensemble(states: Sequence[BetheState], T: float) -> GibbsEnsemble:
    if not states:
        raise ValueError("cannot build an ensemble from an empty state list")
    if not T > 0:
        raise ValueError("temperature must be positive")
    energies = np.array([s.energy for s in states], dtype=float)
    if not np.all(np.isfinite(energies)):
        raise ValueError("state energies must be finite")
    e_min = float(energies.min())
    weights = np.exp(-(energies - e_min) / T)
    z = float(weights.sum())
    probs = weights / z
    probs.setflags(write=False)
    return GibbsEnsemble(tuple(states), float(T), probs, z, e_min)


def equilibrium_energy(ens: GibbsEnsemble) -> float:
    return float(ens.probabilities @ ens.energies)


def adiabatic_energy(ens: GibbsEnsemble, target_coupling: float, spec: GasSpec,
                     tol: float = DEFAULT_TOL) -> float:
    """Mean energy after a slow ramp to ``target_coupling``.

    Each retained eigenstate is followed by its quantum numbers; the
    populations are those of ``ens`` and are not recomputed.
    """
    ramped = solve_many([s.quantum_numbers for s in ens.states], spec.with_coupling(target_coupling), tol)
    return float(ens.probabilities @ np.array([s.energy for s in ramped]))


def effective_temperature(c: float, c_prime: float, T: float, spec: GasSpec) -> float:
    """Temperature of the equilibrium state reached by a strong-coupling ramp c -> c'."""
    lam = strong_coupling_factor(spec.with_coupling(c))
    lam_p = strong_coupling_factor(spec.with_coupling(c_prime))
    return lam_p * T / lam


def strong_coupling_efficiency(c_A: float, c_B: float, spec: GasSpec) -> float:
    """1 - lambda(c_A)/lambda(c_B); independent of both reservoir temperatures."""
    return 1.0 - strong_coupling_factor(spec.with_coupling(c_A)) / strong_coupling_factor(spec.with_coupling(c_B))


def in_strong_coupling_regime(c: float, spec: GasSpec) -> bool:
    """True when (N-1)/(cL) <= 0.1, where the 1/c expansion of lambda_c is trusted."""
    return (spec.particle_count - 1) <= 0.1 * c * spec.box_length


@dataclass(frozen=True)
class CycleSpec:
    gas: GasSpec
    c_A: float
    c_B: float
    T_A: float
    T_C: float

    def __post_init__(self):
        if not (self.c_A > 0 and self.c_B > 0):
            raise ValueError("couplings must be positive")
        if not self.c_A <= self.c_B:
            raise ValueError("the cycle ramps up from c_A to c_B; need c_A <= c_B")
        if not (0 < self.T_A < self.T_C):
            raise ValueError("need 0 < T_A < T_C")


@dataclass(frozen=True)
class CycleResult:
    """Heats, work and efficiency of one cycle.

    ``T_B`` and ``T_D`` are ``None`` when the post-ramp states have no
    meaningful temperature (finite N outside the strong-coupling regime).
    """

    Q2: float
    Q4: float
    work: float
    efficiency: float
    T_B: Optional[float]
    T_D: Optional[float]

    @classmethod
    def from_heats(cls, Q2: float, Q4: float, T_B=None, T_D=None) -> "CycleResult":
        if not Q2 > 0:
            raise NotAnEngineError(f"no net heat intake on the hot isochore (Q2 = {Q2:.6g})")
        work = Q2 - Q4
        return cls(Q2, Q4, work, work / Q2, T_B, T_D)


def shared_states(gas: GasSpec, points: Sequence[tuple[float, float]], cutoff: float = DEFAULT_CUTOFF,
                  tol: float = DEFAULT_TOL) -> dict[float, list[BetheState]]:
    """Enumerate one quantum-number frontier and solve it at every coupling in ``points``.

    ``points`` are (coupling, temperature) pairs. The frontier is built at the
    pair whose Boltzmann weights decay slowest, so it covers all of them.
    Returns a map coupling -> states, all lists in the same quantum-number order.
    """
    def decay(c, T):
        g = gas.with_coupling(c)
        return screening_factor(g, solve_bethe_roots(QuantumNumbers.ground(gas.particle_count), g, tol)) / T

    c_star, T_star = min(points, key=lambda p: decay(*p))
    base = enumerate_states(gas.with_coupling(c_star), T_star, cutoff, tol)
    qns = [s.quantum_numbers for s in base]
    out = {c_star: base}
    for c, _ in points:
        if c not in out:
            out[c] = solve_many(qns, gas.with_coupling(c), tol)
    return out


def run_finite_cycle(spec: CycleSpec, cutoff: float = DEFAULT_CUTOFF, tol: float = DEFAULT_TOL) -> CycleResult:
    """Four-stroke cycle A -> B -> C -> D for N bosons in a box.

    Q2 = E_eq(c_B, T_C) - E_neq(c_B; c_A, T_A)
    Q4 = E_neq(c_A; c_B, T_C) - E_eq(c_A, T_A)
    """
    states = shared_states(spec.gas, [(spec.c_A, spec.T_A), (spec.c_B, spec.T_C)], cutoff, tol)
    at_A = states[spec.c_A]
    at_B = states[spec.c_B]
    e_A = np.array([s.energy for s in at_A])
    e_B = np.array([s.energy for s in at_B])
    ens_A = gibbs_ensemble(at_A, spec.T_A)
    ens_C = gibbs_ensemble(at_B, spec.T_C)
    # populations frozen along each ramp; both couplings share the state order
    Q2 = float(ens_C.probabilities @ e_B) - float(ens_A.probabilities @ e_B)
    Q4 = float(ens_C.probabilities @ e_A) - float(ens_A.probabilities @ e_A)
    T_B = T_D = None
    if in_strong_coupling_regime(spec.c_A, spec.gas) and in_strong_coupling_regime(spec.c_B, spec.gas):
        T_B = effective_temperature(spec.c_A, spec.c_B, spec.T_A, spec.gas)
        T_D = effective_temperature(spec.c_B, spec.c_A, spec.T_C, spec.gas)
    return CycleResult.from_heats(Q2, Q4, T_B, T_D)
