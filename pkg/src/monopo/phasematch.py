"""Temperature dependence of second-harmonic conversion efficiency."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dispersion import CrystalSpec, Wave, delta_n

# sinc^2(u) = 1/2 at u = 1.39155737...
_HALF_MAX_ARG = brentq(lambda u: (np.sin(u) / u) ** 2 - 0.5, 1.0, 2.0, xtol=1e-15)


class WidthCriterion(enum.Enum):
    HALF_MAX = "half_max"
    PI_BOUND = "pi_bound"


@dataclass(frozen=True)
class PhaseMatchPoint:
    temperature: float
    delta_k: float
    eta: float


def delta_k(spec: CrystalSpec, temperature):
    """Phase mismatch in 1/m at ``temperature``."""
    dn = delta_n(spec, Wave.SECOND_HARMONIC, temperature) - delta_n(
        spec, Wave.FUNDAMENTAL, temperature
    )
    return dn * 4 * np.pi / spec.wavelength


def sinc2(u):
    """``(sin u / u)**2`` with the removable singularity at 0 handled by series."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    u2 = u * u
    # sinc(u) = 1 - u^2/6 + u^4/120 - ...
    series = (1.0 - u2 / 6.0 + u2 * u2 / 120.0) ** 2
    out = np.where(small, series, (np.sin(safe) / safe) ** 2)
    return out[()] if out.ndim == 0 else out


def conversion_efficiency(spec: CrystalSpec, temperature):
    """Normalized SHG efficiency, 1 at exact phase matching."""
    return sinc2(delta_k(spec, temperature) * spec.length / 2)


def phase_match_point(spec: CrystalSpec, temperature: float) -> PhaseMatchPoint:
    return PhaseMatchPoint(
        float(temperature),
        float(delta_k(spec, temperature)),
        float(conversion_efficiency(spec, temperature)),
    )


def phase_matching_width(
    spec: CrystalSpec,
    criterion: WidthCriterion = WidthCriterion.HALF_MAX,
    doubly_resonant: bool = False,
) -> float:
    """Full temperature width of the phase-matching curve in K.

    ``PI_BOUND`` is the range where ``|dk * l| <= pi``. ``HALF_MAX`` is the
    full width at half maximum of the sinc^2 curve. A doubly resonant cavity
    doubles the effective length and halves either width.
    """
    ddn = abs(spec.dn_dT_sh - spec.dn_dT_fund)
    if ddn == 0:
        raise ValueError("equal dn/dT for both waves; width is undefined")
    width = spec.wavelength / (2 * spec.length) / ddn
    if criterion is WidthCriterion.HALF_MAX:
        width *= 2 * _HALF_MAX_ARG / np.pi
    if doubly_resonant:
        width /= 2
    return width
