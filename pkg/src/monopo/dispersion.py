"""Thermo-optic refractive-index model of the nonlinear crystal.

Indices are evaluated along the crystal Z(c) axis for the fundamental and
second-harmonic waves. The default model is linear in temperature around the
phase-matching reference temperature; any object with an ``index(wave, T)``
method can stand in for it where a full dispersion model is needed.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol

import numpy as np


class Wave(enum.Enum):
    FUNDAMENTAL = "fundamental"
    SECOND_HARMONIC = "second_harmonic"


@dataclass(frozen=True)
class CrystalSpec:
    """Geometry and thermo-optic data of a PPKTP crystal.

    Parameters
    ----------
    length : float
        Crystal length in m.
    wavelength : float
        Fundamental vacuum wavelength in m.
    n0_fund, n0_sh : float
        Z-axis indices at ``t_ref`` for the fundamental and second harmonic.
    dn_dT_fund, dn_dT_sh : float
        Thermo-optic coefficients in 1/K.
    t_ref : float
        Exact phase-matching temperature in degC.
    poling_period : float
        Poling period in m. Stored for reference only; the phase mismatch
        used here is already the quasi-phase-matched residual.
    """

    length: float = 10e-3
    wavelength: float = 860e-9
    n0_fund: float = 1.84
    n0_sh: float = 1.95
    dn_dT_fund: float = 3.57e-5
    dn_dT_sh: float = 5.10e-5
    t_ref: float = 40.0
    poling_period: float = 4.3e-6

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.dn_dT_sh == self.dn_dT_fund:
            raise ValueError("dn_dT_sh equals dn_dT_fund; phase-matching width is undefined")
        for name in ("n0_fund", "n0_sh"):
            n = getattr(self, name)
            if not 1.0 < n < 3.0:
                raise ValueError(f"{name} must lie in (1, 3), got {n}")

    def n0(self, wave: Wave) -> float:
        return self.n0_fund if wave is Wave.FUNDAMENTAL else self.n0_sh

    def dn_dT(self, wave: Wave) -> float:
        return self.dn_dT_fund if wave is Wave.FUNDAMENTAL else self.dn_dT_sh


class IndexModel(Protocol):
    def index(self, wave: Wave, temperature): ...


def delta_n(spec: CrystalSpec, wave: Wave, temperature):
    """Index deviation from the phase-matching point, ``dn/dT * (T - T_ref)``."""
    return spec.dn_dT(wave) * (np.asarray(temperature, dtype=float) - spec.t_ref)


def refractive_index(spec: CrystalSpec, wave: Wave, temperature):
    """Linearized Z-axis index at ``temperature`` (degC)."""
    return spec.n0(wave) + delta_n(spec, wave, temperature)


@dataclass(frozen=True)
class LinearIndexModel:
    """Default `IndexModel` backed by :func:`refractive_index`."""

    spec: CrystalSpec

    def index(self, wave: Wave, temperature):
        return refractive_index(self.spec, wave, temperature)
