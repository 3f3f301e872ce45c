"""Resonances of the monolithic cavity as a function of crystal temperature."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c
from scipy.optimize import bisect

from .dispersion import CrystalSpec, IndexModel, Wave, refractive_index


@dataclass(frozen=True)
class CavitySpec:
    """Mirror and loss budget of the monolithic cavity.

    ``output_coupler_T`` is the power transmittance of the partially
    transmitting end face, ``intra_cavity_loss_L`` the round-trip loss, and
    ``hr_transmittance`` any residual leak through the high reflector.
    """

    output_coupler_T: float = 0.118
    intra_cavity_loss_L: float = 0.008
    hr_transmittance: float = 0.0

    def __post_init__(self):
        if not 0 < self.output_coupler_T < 1:
            raise ValueError(f"output_coupler_T must lie in (0, 1), got {self.output_coupler_T}")
        if not 0 <= self.intra_cavity_loss_L < 1:
            raise ValueError(
                f"intra_cavity_loss_L must lie in [0, 1), got {self.intra_cavity_loss_L}"
            )
        if not 0 <= self.hr_transmittance < 1:
            raise ValueError(f"hr_transmittance must lie in [0, 1), got {self.hr_transmittance}")
        if self.output_coupler_T + self.intra_cavity_loss_L >= 1:
            raise ValueError("output_coupler_T + intra_cavity_loss_L must be < 1")

    @property
    def total_loss(self) -> float:
        return self.output_coupler_T + self.intra_cavity_loss_L + self.hr_transmittance


@dataclass(frozen=True)
class ResonancePoint:
    temperature: float
    mode_index_m: int


def fsr_temperature(crystal: CrystalSpec) -> float:
    """Temperature change in K that moves the comb by one free spectral range."""
    if crystal.dn_dT_fund == 0:
        raise ValueError("dn_dT_fund is zero; the cavity does not tune with temperature")
    return crystal.wavelength / (2 * crystal.length * abs(crystal.dn_dT_fund))


def fsr_frequency(crystal: CrystalSpec) -> float:
    """Free spectral range in Hz at the reference index."""
    return c / (2 * crystal.n0_fund * crystal.length)


def finesse(cavity: CavitySpec) -> float:
    """High-finesse approximation ``2 pi / (total round-trip loss)``."""
    return 2 * np.pi / cavity.total_loss


def cavity_hwhm(crystal: CrystalSpec, cavity: CavitySpec) -> float:
    """Half width at half maximum of the cavity resonance in Hz."""
    return fsr_frequency(crystal) * cavity.total_loss / (4 * np.pi)


def temperature_linewidth(crystal: CrystalSpec, cavity: CavitySpec) -> float:
    """Full width at half maximum of the resonance in K."""
    return fsr_temperature(crystal) * cavity.total_loss / (2 * np.pi)


def escape_efficiency(cavity: CavitySpec) -> float:
    T = cavity.output_coupler_T
    if T <= 0:
        raise ValueError("output coupler transmittance must be positive")
    return T / (T + cavity.intra_cavity_loss_L + cavity.hr_transmittance)


def detuning_slope(crystal: CrystalSpec) -> float:
    """Magnitude of the cavity frequency shift per kelvin, in Hz/K."""
    return fsr_frequency(crystal) / fsr_temperature(crystal)


def _mode_number(crystal: CrystalSpec, n):
    # round trips of the fundamental wavelength: 2 l n / lambda
    return 2 * crystal.length * n / crystal.wavelength


def resonance_temperatures(
    crystal: CrystalSpec,
    t_lo: float,
    t_hi: float,
    index_model: IndexModel | None = None,
    tol: float = 1e-6,
) -> list[ResonancePoint]:
    """All temperatures in ``[t_lo, t_hi]`` satisfying ``2 l n(T) = m lambda``.

    The default linear index model is solved in closed form. A custom
    ``index_model`` is assumed monotone over the range and each root is
    bracketed and bisected on the mode number to ``tol`` kelvin.
    """
    if t_hi < t_lo:
        raise ValueError(f"empty temperature range [{t_lo}, {t_hi}]")

    if index_model is None:
        a = crystal.dn_dT_fund
        if a == 0:
            raise ValueError("dn_dT_fund is zero; resonances do not depend on temperature")
        q_lo = _mode_number(crystal, refractive_index(crystal, Wave.FUNDAMENTAL, t_lo))
        q_hi = _mode_number(crystal, refractive_index(crystal, Wave.FUNDAMENTAL, t_hi))
        m_first, m_last = math.ceil(min(q_lo, q_hi)), math.floor(max(q_lo, q_hi))
        points = []
        for m in range(m_first, m_last + 1):
            n_m = m * crystal.wavelength / (2 * crystal.length)
            t = crystal.t_ref + (n_m - crystal.n0_fund) / a
            if t_lo <= t <= t_hi:
                points.append(ResonancePoint(float(t), m))
        return sorted(points, key=lambda p: p.temperature)

    def q(t):
        return float(_mode_number(crystal, index_model.index(Wave.FUNDAMENTAL, t)))

    q_lo, q_hi = q(t_lo), q(t_hi)
    points = []
    for m in range(math.ceil(min(q_lo, q_hi)), math.floor(max(q_lo, q_hi)) + 1):
        if q(t_lo) == m:
            t = t_lo
        elif q(t_hi) == m:
            t = t_hi
        else:
            t = bisect(lambda t: q(t) - m, t_lo, t_hi, xtol=tol)
        points.append(ResonancePoint(float(t), m))
    return sorted(points, key=lambda p: p.temperature)


def transmission_profile(crystal: CrystalSpec, cavity: CavitySpec, temperatures):
    """Airy transmission normalized to unit peak, evaluated at each temperature."""
    n = refractive_index(crystal, Wave.FUNDAMENTAL, temperatures)
    rho = (
        (1 - cavity.output_coupler_T)
        * (1 - cavity.intra_cavity_loss_L)
        * (1 - cavity.hr_transmittance)
    )
    r = math.sqrt(rho)
    coeff = 4 * r / (1 - r) ** 2
    q = _mode_number(crystal, n)
    frac = q - np.round(q)
    return 1.0 / (1.0 + coeff * np.sin(np.pi * frac) ** 2)
