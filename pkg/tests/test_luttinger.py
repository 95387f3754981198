import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from idqhe.bethe import GasSpec
from idqhe.errors import DomainError
from idqhe.gibbs import strong_coupling_efficiency
from idqhe.luttinger import (
    TllParams,
    anyon_effective_coupling,
    optimal_xi,
    optimal_xi_small_kappa,
    sound_velocity_strong,
    sound_velocity_tba,
    sound_velocity_weak,
    spinor_effective_coupling,
    tll_efficiency,
    tll_heats,
    tll_work,
    weak_coupling_efficiency,
)


def test_strong_velocity():
    assert sound_velocity_strong(1.0, 1e15) == pytest.approx(2 * math.pi, rel=1e-12)
    assert sound_velocity_strong(1.0, 200.0) == pytest.approx(2 * math.pi * 0.9803, rel=1e-12)
    assert sound_velocity_strong(1.0, 200.0) == pytest.approx(6.159, abs=1e-3)


@given(n=st.floats(0.01, 10), c=st.floats(1.0, 1e4), a=st.floats(0.1, 10))
def test_strong_velocity_homogeneous(n, c, a):
    assert sound_velocity_strong(a * n, a * c) == pytest.approx(a * sound_velocity_strong(n, c), rel=1e-12)


def test_weak_velocity():
    assert sound_velocity_weak(1.0, 0.1) == pytest.approx(2 * math.sqrt(0.1 - 0.1**1.5 / (2 * math.pi)), rel=1e-15)
    assert sound_velocity_weak(1.0, 0.1) == pytest.approx(0.6164, abs=1e-4)
    assert sound_velocity_weak(1.0, 1e-10) == pytest.approx(2 * math.sqrt(1e-10), rel=1e-4)
    with pytest.raises(DomainError):
        sound_velocity_weak(1.0, 50.0)


def test_tba_velocity_limits():
    assert sound_velocity_tba(1.0, 200.0) == pytest.approx(sound_velocity_strong(1.0, 200.0), rel=1e-3)
    assert sound_velocity_tba(1.0, 0.05) == pytest.approx(sound_velocity_weak(1.0, 0.05), rel=1e-2)
    v = [sound_velocity_tba(1.0, c) for c in (0.1, 0.5, 2.0, 10.0, 50.0)]
    assert v == sorted(v)


@pytest.mark.parametrize("c", [0.02, 0.1])
def test_tba_velocity_in_weak_window(c):
    assert sound_velocity_tba(1.0, c) == pytest.approx(sound_velocity_weak(1.0, c), rel=1e-2)


@pytest.mark.parametrize("c", [50.0, 500.0])
def test_tba_velocity_in_strong_window(c):
    assert sound_velocity_tba(1.0, c) == pytest.approx(sound_velocity_strong(1.0, c), rel=1e-3)


@pytest.mark.parametrize("c", [1.0, 2.0, 5.0])
def test_tba_velocity_between_expansions(c):
    v = sound_velocity_tba(1.0, c)
    lo, hi = sorted([sound_velocity_weak(1.0, c), sound_velocity_strong(1.0, c)])
    assert lo <= v <= hi


def test_tll_efficiency_and_work():
    assert tll_efficiency(TllParams(2.0, 2.0, 0.5)) == 0.0
    assert tll_efficiency(TllParams(0.69, 1.0, 0.5)) == pytest.approx(0.31, rel=1e-12)
    assert tll_work(2.5, 1.0, 0.5, 1.0) == 0.0
    assert tll_work(2.5, 1.0, 0.5, 0.5) == 0.0
    assert tll_work(2.50, 1.0, 0.5, 0.69) == pytest.approx(math.pi / 15 * 0.31 * (1 - 0.25 / 0.4761), rel=1e-12)
    assert tll_work(2.50, 1.0, 0.5, 0.69) == pytest.approx(0.0308, abs=1e-4)
    with pytest.raises(DomainError):
        tll_work(2.5, 1.0, 0.5, 0.0)


def test_heats_add_up_to_work():
    vA, vB, TA, TC = 1.7, 2.5, 0.05, 0.1
    Q2, Q4 = tll_heats(vA, vB, TA, TC)
    assert Q2 - Q4 == pytest.approx(tll_work(vB, TC, TA / TC, vA / vB), rel=1e-12)
    assert 1 - Q4 / Q2 == pytest.approx(1 - vA / vB, rel=1e-12)


@given(kappa=st.floats(0.01, 0.98), frac=st.floats(0.01, 0.99))
def test_engine_ordering(kappa, frac):
    xi = kappa + frac * (1 - kappa)
    prm = TllParams(xi, 1.0, kappa)
    assert prm.is_engine
    assert tll_work(1.0, 1.0, kappa, xi) > 0
    assert 0 < tll_efficiency(prm) < 1 - kappa


@pytest.mark.parametrize("kappa", [0.1, 0.3, 0.5, 0.7])
def test_optimal_xi_is_grid_maximum(kappa):
    xs = np.linspace(kappa, 1.0, 200001)[1:-1]
    w = [tll_work(1.0, 1.0, kappa, x) for x in xs]
    assert optimal_xi(kappa) == pytest.approx(xs[int(np.argmax(w))], abs=1e-5)


def test_optimal_xi_values():
    assert optimal_xi(0.5) == pytest.approx(0.69, abs=5e-3)
    xc = optimal_xi(0.3)
    assert xc**3 + 0.09 * xc - 0.18 == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        optimal_xi(1.0)


def test_optimal_xi_stationary():
    kappa = 0.5
    xc = optimal_xi(kappa)
    h = 1e-5
    slope = (tll_work(1.0, 1.0, kappa, xc + h) - tll_work(1.0, 1.0, kappa, xc - h)) / (2 * h)
    scale = tll_work(1.0, 1.0, kappa, xc)
    assert abs(slope) <= 1e-6 * scale


@pytest.mark.parametrize("kappa", [1e-4, 1e-3, 0.01, 0.05, 0.1])
def test_small_kappa_form(kappa):
    assert optimal_xi_small_kappa(kappa) == pytest.approx(optimal_xi(kappa), rel=1e-2)
    assert optimal_xi(kappa) == pytest.approx((2 * kappa**2) ** (1 / 3), rel=0.2)


def test_weak_coupling_efficiency():
    assert weak_coupling_efficiency(2.0, 2.0) == 0.0
    assert weak_coupling_efficiency(1.0, 3.0) == pytest.approx(0.4226, abs=1e-4)
    assert weak_coupling_efficiency(1.0, 4.0) == 0.5


def test_strong_coupling_overlap():
    eta = 1 - sound_velocity_strong(1.0, 100.0) / sound_velocity_strong(1.0, 200.0)
    # finite-N result with N/L = 1: the offset from (N-1)/L vanishes as N grows
    finite = strong_coupling_efficiency(100.0, 200.0, GasSpec(10**6, 1e6))
    assert eta == pytest.approx(finite, rel=1e-5)


def test_anyon_coupling():
    assert anyon_effective_coupling(1.3, 0.0) == 1.3
    assert anyon_effective_coupling(1.0, 2 * math.pi / 3) == pytest.approx(2.0, rel=1e-14)
    thetas = np.linspace(0, 3.1, 20)
    vals = [anyon_effective_coupling(1.0, t) for t in thetas]
    assert vals == sorted(vals)
    with pytest.raises(DomainError):
        anyon_effective_coupling(1.0, math.pi)


@given(c_o=st.floats(-10, 10), c_e=st.floats(-10, 10), corr=st.floats(-0.75, 0.25))
def test_spinor_coupling(c_o, c_e, corr):
    assert spinor_effective_coupling(c_e, c_e, corr) == pytest.approx(c_e, abs=1e-12)
    assert spinor_effective_coupling(c_o, c_e, -0.75) == pytest.approx(c_e, abs=1e-12)
    assert spinor_effective_coupling(c_o, c_e, 0.25) == pytest.approx(c_o, abs=1e-12)


def test_spinor_range():
    with pytest.raises(DomainError):
        spinor_effective_coupling(1.0, 2.0, 0.5)
