import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from monopo.dispersion import CrystalSpec
from monopo.phasematch import (
    WidthCriterion,
    conversion_efficiency,
    delta_k,
    phase_match_point,
    phase_matching_width,
    sinc2,
)


def eta_by_quadrature(spec, temperature):
    """|(1/l) int_0^l exp(i dk z) dz|^2, integrated numerically."""
    dk = (spec.dn_dT_sh - spec.dn_dT_fund) * (temperature - spec.t_ref) * 4 * np.pi / spec.wavelength
    l = spec.length
    re = quad(lambda z: np.cos(dk * z), 0, l, epsabs=1e-14)[0]
    im = quad(lambda z: np.sin(dk * z), 0, l, epsabs=1e-14)[0]
    return (re**2 + im**2) / l**2


def test_delta_k_values(crystal):
    assert delta_k(crystal, crystal.t_ref) == 0
    assert delta_k(crystal, crystal.t_ref + 1) == pytest.approx(223.5645, abs=1e-3)
    assert delta_k(crystal, crystal.t_ref - 1) == pytest.approx(-223.5645, abs=1e-3)


@given(st.floats(-20, 100))
def test_delta_k_matches_closed_form(t):
    spec = CrystalSpec()
    closed = (spec.dn_dT_sh - spec.dn_dT_fund) * (t - spec.t_ref) * 4 * np.pi / spec.wavelength
    assert delta_k(spec, t) == pytest.approx(closed, rel=1e-12, abs=1e-9)


def test_efficiency_peak_is_exactly_one(crystal):
    eta = conversion_efficiency(crystal, crystal.t_ref)
    assert np.isfinite(eta)
    assert eta == 1.0


@pytest.mark.parametrize("dt, expected", [(0.6, 0.858767), (1.0, 0.647021)])
def test_efficiency_examples(crystal, dt, expected):
    eta = conversion_efficiency(crystal, crystal.t_ref + dt)
    assert eta == pytest.approx(expected, abs=1e-6)
    assert eta == pytest.approx(eta_by_quadrature(crystal, crystal.t_ref + dt), abs=1e-10)


@pytest.mark.parametrize("dt", [-3.0, -0.7, 1e-7, 0.25, 1.9, 4.0])
def test_efficiency_matches_quadrature(crystal, dt):
    t = crystal.t_ref + dt
    assert conversion_efficiency(crystal, t) == pytest.approx(eta_by_quadrature(crystal, t), abs=1e-10)


def test_sinc2_series_branch_is_continuous():
    u = np.array([0.0, 5e-5, 9.9999e-5, 1.0001e-4, 1e-3])
    direct = (np.sin(u[1:]) / u[1:]) ** 2
    assert np.allclose(sinc2(u)[1:], direct, rtol=0, atol=1e-15)
    assert sinc2(0.0) == 1.0


@given(st.floats(0, 10))
def test_efficiency_is_even(dt):
    spec = CrystalSpec()
    assert conversion_efficiency(spec, spec.t_ref + dt) == pytest.approx(
        conversion_efficiency(spec, spec.t_ref - dt), abs=1e-15
    )


def test_widths(crystal):
    assert phase_matching_width(crystal) == pytest.approx(2.4898, abs=1e-4)
    assert phase_matching_width(crystal, WidthCriterion.PI_BOUND) == pytest.approx(2.81046, abs=1e-5)
    assert phase_matching_width(crystal, doubly_resonant=True) == pytest.approx(1.2449, abs=1e-4)


def test_half_max_width_against_root_of_quadrature_curve(crystal):
    half = brentq(lambda d: eta_by_quadrature(crystal, crystal.t_ref + d) - 0.5, 0.5, 2.0, xtol=1e-12)
    assert phase_matching_width(crystal) == pytest.approx(2 * half, abs=1e-8)


def test_half_max_width_consistent_with_curve(crystal):
    w = phase_matching_width(crystal)
    for sign in (-1, 1):
        assert conversion_efficiency(crystal, crystal.t_ref + sign * w / 2) == pytest.approx(0.5, abs=1e-6)


def test_pi_bound_edge_is_pi(crystal):
    w = phase_matching_width(crystal, WidthCriterion.PI_BOUND)
    dkl = delta_k(crystal, crystal.t_ref + w / 2) * crystal.length
    assert abs(dkl) == pytest.approx(np.pi, rel=1e-12)
    # sinc^2 at |dk l| = pi is 4/pi^2, below one half
    assert conversion_efficiency(crystal, crystal.t_ref + w / 2) == pytest.approx(4 / np.pi**2, rel=1e-12)


def test_phase_match_point(crystal):
    p = phase_match_point(crystal, crystal.t_ref)
    assert (p.delta_k, p.eta) == (0.0, 1.0)
