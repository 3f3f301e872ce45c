"""Quadrature noise of a subthreshold OPO with output losses and phase jitter.

Variances are in shot-noise units: vacuum reads exactly 1. The squeezed
quadrature is

    R- = 1 - kappa * T/(T+L) * 4x / ((1+x)^2 + (f/f0)^2)

and the anti-squeezed one swaps the sign and uses ``(1-x)^2``. A residual
phase-lock error ``theta_tilde`` mixes the two with cos^2/sin^2 weights.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Quadrature(enum.Enum):
    SQUEEZED = "squeezed"
    ANTI_SQUEEZED = "anti_squeezed"

    @property
    def other(self) -> "Quadrature":
        return Quadrature.ANTI_SQUEEZED if self is Quadrature.SQUEEZED else Quadrature.SQUEEZED


class AboveThresholdError(ValueError):
    """Raised for pump powers at or above the oscillation threshold."""


@dataclass(frozen=True)
class SqueezingParams:
    """Everything the noise model consumes.

    Parameters
    ----------
    kappa : float
        Overall detection efficiency outside the OPO, in (0, 1].
    oc_T, loss_L : float
        Output-coupler transmittance and intra-cavity loss.
    f0 : float
        Cavity half width at half maximum in Hz.
    theta_tilde : float
        Effective phase-lock error in rad.
    p_threshold : float
        Oscillation threshold pump power in W.
    """

    kappa: float = 0.968
    oc_T: float = 0.118
    loss_L: float = 0.008
    f0: float = 82e6
    theta_tilde: float = np.deg2rad(2.0)
    p_threshold: float = 0.283

    def __post_init__(self):
        if not 0 < self.kappa <= 1:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        if not self.oc_T > 0 or self.loss_L < 0:
            raise ValueError("need oc_T > 0 and loss_L >= 0")
        if not 0 <= abs(self.theta_tilde) < np.pi / 2:
            raise ValueError(f"theta_tilde must satisfy |theta| < pi/2, got {self.theta_tilde}")
        if not self.f0 > 0:
            raise ValueError(f"f0 must be positive, got {self.f0}")
        if not self.p_threshold > 0:
            raise ValueError(f"p_threshold must be positive, got {self.p_threshold}")

    @property
    def escape_efficiency(self) -> float:
        return self.oc_T / (self.oc_T + self.loss_L)

    @property
    def total_efficiency(self) -> float:
        return self.kappa * self.escape_efficiency


@dataclass(frozen=True)
class PumpState:
    power: float
    x: float

    @classmethod
    def from_power(cls, power: float, p_threshold: float) -> "PumpState":
        return cls(power, float(pump_to_x(power, p_threshold)))


def pump_to_x(power, p_threshold):
    """Normalized pump amplitude ``sqrt(P / P_th)``."""
    power = np.asarray(power, dtype=float)
    if np.any(power < 0):
        raise ValueError("pump power must be non-negative")
    if np.any(power >= p_threshold):
        raise AboveThresholdError(
            f"pump power {np.max(power)} W is not below threshold {p_threshold} W"
        )
    x = np.sqrt(power / p_threshold)
    return x[()] if x.ndim == 0 else x


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x >= 1):
        raise AboveThresholdError("normalized pump amplitude must satisfy 0 <= x < 1")
    return x


def variance(quad: Quadrature, x, f, params: SqueezingParams):
    """Quadrature variance without phase noise, in shot-noise units."""
    x = _check_x(x)
    f = np.asarray(f, dtype=float)
    eff = params.total_efficiency
    lorentz = (f / params.f0) ** 2
    if quad is Quadrature.SQUEEZED:
        r = 1 - eff * 4 * x / ((1 + x) ** 2 + lorentz)
    else:
        r = 1 + eff * 4 * x / ((1 - x) ** 2 + lorentz)
    return r[()] if r.ndim == 0 else r


def variance_with_phase_noise(quad: Quadrature, x, f, params: SqueezingParams):
    """Variance seen through a homodyne lock offset by ``theta_tilde``."""
    c2 = np.cos(params.theta_tilde) ** 2
    s2 = np.sin(params.theta_tilde) ** 2
    return variance(quad, x, f, params) * c2 + variance(quad.other, x, f, params) * s2


def to_db(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("noise power ratio must be positive")
    out = 10 * np.log10(r)
    return out[()] if out.ndim == 0 else out


def from_db(db):
    out = 10 ** (np.asarray(db, dtype=float) / 10)
    return out[()] if out.ndim == 0 else out


def pump_sweep(params: SqueezingParams, powers, f: float) -> dict[str, np.ndarray]:
    """Squeezing and anti-squeezing versus pump power (W) at frequency ``f``."""
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    bad = powers[powers >= params.p_threshold]
    if bad.size:
        listed = ", ".join(f"{p * 1e3:g} mW" for p in bad)
        raise AboveThresholdError(
            f"pump powers at or above threshold {params.p_threshold * 1e3:g} mW: {listed}"
        )
    x = np.atleast_1d(pump_to_x(powers, params.p_threshold))
    return {
        "power_mW": powers * 1e3,
        "x": x,
        "sq_dB": to_db(variance_with_phase_noise(Quadrature.SQUEEZED, x, f, params)),
        "antisq_dB": to_db(variance_with_phase_noise(Quadrature.ANTI_SQUEEZED, x, f, params)),
    }


def spectrum(params: SqueezingParams, x: float, f_grid) -> dict[str, np.ndarray]:
    """Noise spectra of both quadratures over ``f_grid`` (Hz)."""
    f = np.atleast_1d(np.asarray(f_grid, dtype=float))
    _check_x(x)
    return {
        "freq_MHz": f / 1e6,
        "sq_dB": to_db(variance_with_phase_noise(Quadrature.SQUEEZED, x, f, params)),
        "antisq_dB": to_db(variance_with_phase_noise(Quadrature.ANTI_SQUEEZED, x, f, params)),
    }


def squeezing_bandwidth(x, f0):
    """Frequency where the squeezed variance has recovered half way to shot noise."""
    x = _check_x(x)
    if not f0 > 0:
        raise ValueError("f0 must be positive")
    out = (1 + x) * f0
    return out[()] if out.ndim == 0 else out


def propagation_efficiency(visibility: float, path_efficiency: float, detector_qe: float) -> float:
    """Detection efficiency outside the OPO; homodyne visibility enters squared."""
    for name, v in (("visibility", visibility), ("path_efficiency", path_efficiency),
                    ("detector_qe", detector_qe)):
        if not 0 < v <= 1:
            raise ValueError(f"{name} must lie in (0, 1], got {v}")
    return visibility**2 * path_efficiency * detector_qe


def parametric_gain(x, amplify: bool = True):
    """Classical seed gain ``1/(1-x)^2`` (amplification) or ``1/(1+x)^2``."""
    x = _check_x(x)
    g = 1 / (1 - x) ** 2 if amplify else 1 / (1 + x) ** 2
    return g[()] if g.ndim == 0 else g


def threshold_from_gain(measured_gain: float, pump_power: float) -> float:
    """Oscillation threshold implied by an amplification gain measured at ``pump_power``."""
    if not measured_gain > 1:
        raise ValueError(f"amplification gain must exceed 1, got {measured_gain}")
    x = 1 - 1 / np.sqrt(measured_gain)
    return pump_power / x**2
