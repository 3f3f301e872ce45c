"""Simultaneous cavity resonance and phase matching by temperature tuning.

The resonance comb moves by one free spectral range every ``fsr_temperature``
kelvin while the conversion efficiency follows a much wider sinc^2 envelope.
As long as the envelope is wider than the comb spacing, some resonance always
lands close to the efficiency peak.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cavity import CavitySpec, fsr_temperature, resonance_temperatures, transmission_profile
from .dispersion import CrystalSpec
from .phasematch import conversion_efficiency


@dataclass(frozen=True)
class CoResonancePoint:
    temperature: float
    mode_index_m: int
    eta_at_resonance: float


def align_comb(crystal: CrystalSpec, offset: float) -> CrystalSpec:
    """Return a copy of ``crystal`` with a resonance at ``t_ref + offset``.

    The reference index is nudged by less than half a mode spacing in index
    (``lambda / 4l``), which leaves every thermal quantity unchanged.
    """
    a = crystal.dn_dT_fund
    step = crystal.wavelength / (2 * crystal.length)
    m = round((crystal.n0_fund + a * offset) / step)
    return replace(crystal, n0_fund=m * step - a * offset)


def comb_offset(crystal: CrystalSpec) -> float:
    """Distance in K from ``t_ref`` up to the next resonance, in ``[0, fsr)``."""
    fsr = fsr_temperature(crystal)
    points = resonance_temperatures(crystal, crystal.t_ref, crystal.t_ref + fsr)
    return (points[0].temperature - crystal.t_ref) % fsr


def co_resonant_points(
    crystal: CrystalSpec,
    t_lo: float,
    t_hi: float,
    offset: float | None = None,
) -> list[CoResonancePoint]:
    """Resonances in ``[t_lo, t_hi]`` annotated with conversion efficiency.

    Sorted best first; efficiencies equal to 1e-9 (a comb symmetric about ``t_ref``)
    put the lower temperature first. ``offset`` re-positions the comb via
    :func:`align_comb` before searching.
    """
    if offset is not None:
        crystal = align_comb(crystal, offset)
    points = [
        CoResonancePoint(p.temperature, p.mode_index_m, float(conversion_efficiency(crystal, p.temperature)))
        for p in resonance_temperatures(crystal, t_lo, t_hi)
    ]
    return sorted(points, key=lambda p: (-round(p.eta_at_resonance, 9), p.temperature))


def best_eta_for_offset(crystal: CrystalSpec, spacing: float, offset: float) -> float:
    """Highest efficiency on a comb ``t_ref + offset + k * spacing``."""
    if spacing == 0:
        return 1.0
    k0 = math.floor(-offset / spacing)
    ks = np.arange(k0 - 2, k0 + 4)
    return float(np.max(conversion_efficiency(crystal, crystal.t_ref + offset + ks * spacing)))


def worst_case_eta_for_spacing(crystal: CrystalSpec, spacing: float) -> float:
    """Guaranteed best-resonance efficiency for a comb of the given spacing.

    The worst alignment puts the envelope peak midway between two teeth, so
    the nearest resonances sit ``spacing / 2`` from it on either side. This
    holds while ``spacing / 2`` is inside the main lobe of the envelope.
    """
    if spacing < 0:
        raise ValueError("comb spacing must be non-negative")
    if spacing == 0:
        return 1.0
    return float(conversion_efficiency(crystal, crystal.t_ref + spacing / 2))


def worst_case_best_eta(crystal: CrystalSpec) -> float:
    return worst_case_eta_for_spacing(crystal, fsr_temperature(crystal))


def scan_table(
    crystal: CrystalSpec, cavity: CavitySpec, t_lo: float, t_hi: float, step: float
) -> dict[str, np.ndarray]:
    """Transmission and efficiency over a temperature grid, both endpoints included."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if t_hi < t_lo:
        raise ValueError(f"empty temperature range [{t_lo}, {t_hi}]")
    n = int(math.floor((t_hi - t_lo) / step + 1e-9))
    temps = t_lo + step * np.arange(n + 1)
    if temps[-1] < t_hi - 1e-12 * max(1.0, abs(t_hi)):
        temps = np.append(temps, t_hi)
    return {
        "temperature_C": temps,
        "transmission": np.asarray(transmission_profile(crystal, cavity, temps)),
        "eta": np.asarray(conversion_efficiency(crystal, temps)),
    }
