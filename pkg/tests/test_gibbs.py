import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from idqhe.bethe import GasSpec, QuantumNumbers, enumerate_states, solve_bethe_roots
from idqhe.errors import NotAnEngineError
from idqhe.gibbs import (
    CycleResult,
    CycleSpec,
    adiabatic_energy,
    effective_temperature,
    equilibrium_energy,
    gibbs_ensemble,
    run_finite_cycle,
    strong_coupling_efficiency,
)

from test_bethe import two_body_oracle


def _fake(energies):
    from idqhe.bethe import BetheState

    return [
        BetheState(QuantumNumbers((i + 1,)), np.array([math.sqrt(e)]), e, 0.0, 1.0)
        for i, e in enumerate(energies)
    ]


def test_single_state_ensemble():
    ens = gibbs_ensemble(_fake([3.0]), 2.0)
    assert ens.probabilities.tolist() == [1.0]
    assert ens.partition_function == 1.0
    assert ens.log_partition_function == pytest.approx(-1.5)


def test_degenerate_pair_is_uniform():
    ens = gibbs_ensemble(_fake([2.0, 2.0]), 0.7)
    assert ens.probabilities.tolist() == [0.5, 0.5]
    assert equilibrium_energy(ens) == 2.0


@given(st.lists(st.floats(0.0, 1e4), min_size=1, max_size=30), st.floats(1e-3, 1e4))
def test_probabilities_normalised_and_ordered(energies, T):
    energies = sorted(energies)
    ens = gibbs_ensemble(_fake(energies), T)
    p = ens.probabilities
    assert abs(p.sum() - 1.0) <= 1e-12
    assert np.all(np.diff(p) <= 0)
    np.testing.assert_allclose(p, np.exp(-np.array(energies) / T - ens.log_partition_function), rtol=1e-10, atol=1e-300)


def test_low_temperature_energy_is_ground_state():
    spec = GasSpec(3, 1.0, 4.0)
    states = enumerate_states(spec, 1e-3)
    assert equilibrium_energy(gibbs_ensemble(states, 1e-3)) == states[0].energy


def test_tg_probabilities_match_closed_form():
    T = 100.0
    states = enumerate_states(GasSpec(2, 1.0, 1e6), T)
    ens = gibbs_ensemble(states, T)
    e = np.array([math.pi**2 * sum(v * v for v in s.quantum_numbers.values) for s in states])
    w = np.exp(-(e - e[0]) / T)
    np.testing.assert_allclose(ens.probabilities, w / w.sum(), rtol=1e-4, atol=1e-12)


def test_equilibrium_energy_converged_in_cutoff():
    spec, T = GasSpec(5, 1.0, 200.0), 150.0
    # the default 1e-8 cutoff leaves a 1.7e-6 tail in <E>; 1e-10 brings it to 3e-8
    e1 = equilibrium_energy(gibbs_ensemble(enumerate_states(spec, T, 1e-10), T))
    e2 = equilibrium_energy(gibbs_ensemble(enumerate_states(spec, T, 1e-14), T))
    assert e1 == pytest.approx(e2, rel=1e-6)


def test_identity_ramp():
    spec = GasSpec(3, 1.0, 6.0)
    ens = gibbs_ensemble(enumerate_states(spec, 20.0), 20.0)
    assert adiabatic_energy(ens, 6.0, spec) == pytest.approx(equilibrium_energy(ens), rel=1e-14)


def test_ramp_keeps_populations():
    spec = GasSpec(3, 1.0, 6.0)
    ens = gibbs_ensemble(enumerate_states(spec, 20.0), 20.0)
    before = ens.probabilities.copy()
    adiabatic_energy(ens, 12.0, spec)
    np.testing.assert_array_equal(ens.probabilities, before)
    assert not ens.probabilities.flags.writeable


def test_strong_coupling_ramp_scales_energy():
    spec = GasSpec(5, 1.0, 500.0)
    ens = gibbs_ensemble(enumerate_states(spec, 150.0), 150.0)
    lam = 1 - 4 * 4 / 500 + 12 * 16 / 500**2
    lam_p = 1 - 4 * 4 / 1000 + 12 * 16 / 1000**2
    assert adiabatic_energy(ens, 1000.0, spec) == pytest.approx(lam_p / lam * equilibrium_energy(ens), rel=1e-3)


def test_two_body_ramp_against_per_state_oracle():
    spec, T = GasSpec(2, 1.0, 1.0), 20.0
    ens = gibbs_ensemble(enumerate_states(spec, T), T)
    direct = 0.0
    for s, p in zip(ens.states, ens.probabilities):
        k1, k2 = two_body_oracle(*s.quantum_numbers.values, 1.0, 2.0)
        direct += p * (k1 * k1 + k2 * k2)
    assert adiabatic_energy(ens, 2.0, spec) == pytest.approx(direct, rel=1e-12)


def test_effective_temperature():
    spec = GasSpec(5, 1.0)
    assert effective_temperature(200.0, 200.0, 150.0, spec) == 150.0
    assert effective_temperature(200.0, 100.0, 150.0, spec) == pytest.approx(150 * 0.8592 / 0.9248, rel=1e-12)
    assert effective_temperature(200.0, 100.0, 150.0, spec) == pytest.approx(139.36, abs=0.01)
    assert effective_temperature(3.0, 40.0, 7.0, GasSpec(1, 1.0)) == 7.0


def test_strong_coupling_efficiency_values():
    spec = GasSpec(5, 1.0)
    assert strong_coupling_efficiency(100.0, 100.0, spec) == 0.0
    assert strong_coupling_efficiency(100.0, 200.0, spec) == pytest.approx(1 - 0.8592 / 0.9248, rel=1e-12)
    assert strong_coupling_efficiency(100.0, 200.0, spec) == pytest.approx(0.0709, abs=1e-4)
    assert strong_coupling_efficiency(2.0, 9.0, GasSpec(1, 1.0)) == 0.0


# -- cycle -------------------------------------------------------------------


def test_cycle_spec_validation():
    gas = GasSpec(2, 1.0)
    with pytest.raises(ValueError):
        CycleSpec(gas, 5.0, 1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        CycleSpec(gas, 1.0, 5.0, 2.0, 1.0)


def test_not_an_engine():
    with pytest.raises(NotAnEngineError):
        CycleResult.from_heats(-1.0, 2.0)
    with pytest.raises(NotAnEngineError):
        run_finite_cycle(CycleSpec(GasSpec(5, 1.0), 20.0, 200.0, 120.0, 150.0))


def test_equal_couplings_give_no_work():
    res = run_finite_cycle(CycleSpec(GasSpec(3, 1.0), 30.0, 30.0, 10.0, 40.0))
    assert res.work == pytest.approx(0.0, abs=1e-12 * res.Q2)
    assert res.efficiency == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "N,cA,cB,TA,TC", [(3, 10.0, 40.0, 10.0, 60.0), (4, 50.0, 100.0, 30.0, 90.0), (2, 1.0, 5.0, 5.0, 50.0)]
)
def test_first_law_and_carnot(N, cA, cB, TA, TC):
    res = run_finite_cycle(CycleSpec(GasSpec(N, 1.0), cA, cB, TA, TC))
    assert res.work == res.Q2 - res.Q4
    assert res.efficiency == res.work / res.Q2
    assert 0 <= res.efficiency < 1
    assert res.efficiency <= 1 - TA / TC + 1e-9


def test_two_body_cycle_against_brute_force():
    cA, cB, TA, TC = 1.0, 5.0, 5.0, 50.0
    res = run_finite_cycle(CycleSpec(GasSpec(2, 1.0), cA, cB, TA, TC))
    pairs = [(a, b) for a in range(1, 19) for b in range(a + 1, 20)]
    eA = np.array([sum(k * k for k in two_body_oracle(a, b, 1.0, cA)) for a, b in pairs])
    eB = np.array([sum(k * k for k in two_body_oracle(a, b, 1.0, cB)) for a, b in pairs])
    pA = np.exp(-(eA - eA.min()) / TA)
    pA /= pA.sum()
    pC = np.exp(-(eB - eB.min()) / TC)
    pC /= pC.sum()
    Q2 = pC @ eB - pA @ eB
    Q4 = pC @ eA - pA @ eA
    assert res.Q2 == pytest.approx(Q2, rel=1e-7)
    assert res.Q4 == pytest.approx(Q4, rel=1e-7)


def test_strong_coupling_temperature_independence():
    gas = GasSpec(5, 1.0)
    TC = 150.0
    etas = [run_finite_cycle(CycleSpec(gas, 500.0, 1000.0, f * TC, TC)).efficiency for f in (0.2, 0.5, 0.8)]
    assert (max(etas) - min(etas)) / np.mean(etas) < 0.01


def test_effective_temperatures_reported_only_at_strong_coupling():
    gas = GasSpec(3, 1.0)
    strong = run_finite_cycle(CycleSpec(gas, 100.0, 200.0, 20.0, 60.0))
    assert strong.T_B == pytest.approx(effective_temperature(100.0, 200.0, 20.0, gas))
    assert strong.T_D == pytest.approx(effective_temperature(200.0, 100.0, 60.0, gas))
    weak = run_finite_cycle(CycleSpec(gas, 2.0, 8.0, 5.0, 30.0))
    assert weak.T_B is None and weak.T_D is None


def test_most_probable_state_survives_ramp():
    spec = GasSpec(3, 1.0, 5.0)
    ens = gibbs_ensemble(enumerate_states(spec, 30.0), 30.0)
    i = int(np.argmax(ens.probabilities))
    from idqhe.bethe import solve_many

    ramped = solve_many([s.quantum_numbers for s in ens.states], spec.with_coupling(50.0))
    assert ramped[i].quantum_numbers == ens.states[i].quantum_numbers
