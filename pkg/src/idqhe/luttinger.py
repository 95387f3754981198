"""Luttinger-liquid closed forms and coupling maps.

With free energy F = E0 - pi T^2 / (6 v_s), entropy s = pi T / (3 v_s) and the
two isentropes fix T_A/T_B = T_D/T_C = v_s^A / v_s^B = xi. Everything below
follows from that ratio and kappa = T_A / T_C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .tba import DEFAULT_GRID, GridConfig, mu_from_density


@dataclass(frozen=True)
class TllParams:
    v_s_A: float
    v_s_B: float
    kappa: float

    def __post_init__(self):
        if not (self.v_s_A > 0 and self.v_s_B > 0):
            raise ValueError("sound velocities must be positive")

    @property
    def xi(self) -> float:
        return self.v_s_A / self.v_s_B

    @property
    def is_engine(self) -> bool:
        return 0 < self.kappa < self.xi < 1


def sound_velocity_strong(n: float, c: float) -> float:
    """2 pi n (1 - 4n/c + 12 n^2/c^2), valid for c >> n."""
    g = n / c
    return 2.0 * math.pi * n * (1.0 - 4.0 * g + 12.0 * g * g)


def sound_velocity_weak(n: float, c: float) -> float:
    """2n sqrt(c/n - (c/n)^{3/2} / 2pi), valid for c << n."""
    gamma = c / n
    radicand = gamma - gamma**1.5 / (2.0 * math.pi)
    if not radicand > 0:
        raise DomainError(f"weak-coupling expansion invalid at c/n = {gamma:g} (radicand {radicand:.3g})")
    return 2.0 * n * math.sqrt(radicand)


def sound_velocity_tba(n: float, c: float, grid: GridConfig = DEFAULT_GRID,
                       rel_step: float = 1e-4, temperature: float | None = None) -> float:
    """Sound velocity sqrt(2 n dmu/dn) from the near-zero-temperature TBA.

    dmu/dn is a central difference of two density inversions at n(1 +- rel_step);
    the temperature defaults to 1e-4 n^2.
    """
    if not (n > 0 and c > 0):
        raise ValueError("density and coupling must be positive")
    T = 1e-4 * n * n if temperature is None else temperature
    dn = rel_step * n
    mu_hi = mu_from_density(c, n + dn, T, grid, rtol=1e-14)
    mu_lo = mu_from_density(c, n - dn, T, grid, rtol=1e-14)
    return math.sqrt(2.0 * n * (mu_hi - mu_lo) / (2.0 * dn))


def tll_efficiency(params: TllParams) -> float:
    return 1.0 - params.xi


def tll_work(v_s_B: float, T_C: float, kappa: float, xi: float, L: float = 1.0) -> float:
    """W = (pi L T_C^2 / 6 v_s^B)(1 - xi)(1 - kappa^2/xi^2); signed outside 0 < kappa < xi < 1."""
    if xi == 0:
        raise DomainError("xi = 0 is outside the domain of the work formula")
    return math.pi * L * T_C**2 / (6.0 * v_s_B) * (1.0 - xi) * (1.0 - kappa**2 / xi**2)


def tll_heats(v_s_A: float, v_s_B: float, T_A: float, T_C: float, L: float = 1.0) -> tuple[float, float]:
    """Q2 and Q4 from the T^2 heat integrals along the two isochores."""
    xi = v_s_A / v_s_B
    T_B = T_A / xi
    T_D = T_C * xi
    Q2 = math.pi * L / (6.0 * v_s_B) * (T_C**2 - T_B**2)
    Q4 = math.pi * L / (6.0 * v_s_A) * (T_D**2 - T_A**2)
    return Q2, Q4


def optimal_xi(kappa: float) -> float:
    """Velocity ratio maximising W at fixed kappa: the real root of xi^3 + kappa^2 xi - 2 kappa^2 = 0."""
    if not 0 < kappa < 1:
        raise DomainError("kappa must lie in (0, 1)")
    k2 = kappa * kappa
    # 27 k2 (sqrt(1 + k2/27) - 1), written to avoid cancellation for small kappa
    a = k2 * k2 / (math.sqrt(1.0 + k2 / 27.0) + 1.0)
    cube = a ** (1.0 / 3.0)
    return k2 / cube - cube / 3.0


def optimal_xi_small_kappa(kappa: float) -> float:
    """Leading small-kappa form (2 kappa^2)^{1/3} [1 - (kappa/2)^{2/3} / 3]."""
    return (2.0 * kappa * kappa) ** (1.0 / 3.0) * (1.0 - (kappa / 2.0) ** (2.0 / 3.0) / 3.0)


def weak_coupling_efficiency(c_A: float, c_B: float) -> float:
    return 1.0 - math.sqrt(c_A / c_B)


def anyon_effective_coupling(c_tilde: float, theta: float) -> float:
    """Bosonic coupling c_tilde / cos(theta/2) equivalent to Lieb-Liniger anyons."""
    cos_half = math.cos(theta / 2.0)
    if not cos_half > 1e-15 or not 0 <= theta < math.pi:
        raise DomainError(f"theta = {theta!r} must lie in [0, pi); the coupling diverges at pi")
    return c_tilde / cos_half


def spinor_effective_coupling(c_o: float, c_e: float, spin_corr: float) -> float:
    """(3 c_o + c_e)/4 + (c_o - c_e) <S_i . S_j> for a two-component Fermi gas."""
    if not -0.75 <= spin_corr <= 0.25:
        raise DomainError("spin correlator must lie in [-3/4, 1/4]")
    return (3.0 * c_o + c_e) / 4.0 + (c_o - c_e) * spin_corr
