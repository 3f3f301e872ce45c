from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monopo.cavity import fsr_temperature, resonance_temperatures, temperature_linewidth
from monopo.coresonance import (
    align_comb,
    best_eta_for_offset,
    co_resonant_points,
    comb_offset,
    scan_table,
    worst_case_best_eta,
    worst_case_eta_for_spacing,
)
from monopo.dispersion import CrystalSpec
from monopo.phasematch import WidthCriterion, conversion_efficiency, phase_matching_width


def brute_force_worst_case(crystal, spacing, n=1000):
    """min over comb offsets (grid of spacing/n) of the best efficiency on the comb."""
    offsets = np.arange(n) * spacing / n
    best = []
    for off in offsets:
        teeth = crystal.t_ref + off + spacing * np.arange(-6, 7)
        best.append(np.max(conversion_efficiency(crystal, teeth)))
    return float(np.min(best))


def test_worst_case_value(crystal):
    assert worst_case_best_eta(crystal) == pytest.approx(0.857773, abs=1e-6)


def test_worst_case_against_brute_force(crystal):
    spacing = fsr_temperature(crystal)
    assert worst_case_best_eta(crystal) == pytest.approx(brute_force_worst_case(crystal, spacing), abs=1e-4)


@pytest.mark.parametrize("spacing", [0.1, 0.5, 1.0, 2.0, 2.8])
def test_worst_case_for_spacing_against_brute_force(crystal, spacing):
    assert worst_case_eta_for_spacing(crystal, spacing) == pytest.approx(
        brute_force_worst_case(crystal, spacing), abs=1e-4
    )


def test_worst_case_limits(crystal):
    assert worst_case_eta_for_spacing(crystal, 0.0) == 1.0
    assert worst_case_eta_for_spacing(crystal, 1e-9) == pytest.approx(1.0, abs=1e-12)
    fwhm = phase_matching_width(crystal, WidthCriterion.HALF_MAX)
    assert worst_case_eta_for_spacing(crystal, fwhm) == pytest.approx(0.5, abs=1e-9)


def test_worst_case_monotone_in_spacing(crystal):
    spacings = np.linspace(0.0, 2 * phase_matching_width(crystal, WidthCriterion.PI_BOUND), 400)
    values = [worst_case_eta_for_spacing(crystal, s) for s in spacings]
    assert np.all(np.diff(values) <= 1e-15)


@settings(max_examples=100)
@given(st.floats(0.0, 1.0, exclude_max=True))
def test_bound_holds_for_any_offset(frac):
    crystal = CrystalSpec()
    spacing = fsr_temperature(crystal)
    offset = frac * spacing
    best = co_resonant_points(crystal, crystal.t_ref - 3, crystal.t_ref + 3, offset=offset)[0]
    # resonance temperatures carry ~1e-11 K rounding
    assert best.eta_at_resonance >= worst_case_best_eta(crystal) - 1e-9
    assert best_eta_for_offset(crystal, spacing, offset) == pytest.approx(best.eta_at_resonance, abs=1e-9)


def test_best_point_meets_guarantee_for_shipped_alignment(crystal):
    points = co_resonant_points(crystal, crystal.t_ref - 1.5, crystal.t_ref + 1.5)
    assert len(points) >= 2
    assert points[0].eta_at_resonance >= 0.857
    etas = [p.eta_at_resonance for p in points]
    assert etas == sorted(etas, reverse=True)
    for p in points:
        assert p.eta_at_resonance == conversion_efficiency(crystal, p.temperature)


def test_aligned_comb_gives_unit_efficiency(crystal):
    points = co_resonant_points(crystal, crystal.t_ref - 1.5, crystal.t_ref + 1.5, offset=0.0)
    assert points[0].temperature == pytest.approx(crystal.t_ref, abs=1e-9)
    assert points[0].eta_at_resonance == pytest.approx(1.0, abs=1e-12)


def test_symmetric_tie_breaks_to_lower_temperature(crystal):
    spacing = fsr_temperature(crystal)
    points = co_resonant_points(crystal, crystal.t_ref - 2, crystal.t_ref + 2, offset=spacing / 2)
    a, b = points[:2]
    assert a.eta_at_resonance == pytest.approx(b.eta_at_resonance, abs=1e-9)
    assert a.temperature < b.temperature


def test_narrow_off_resonance_scan_is_empty(crystal, opo1):
    aligned = align_comb(crystal, 0.0)
    width = temperature_linewidth(aligned, opo1)
    t0 = aligned.t_ref + 0.3
    assert co_resonant_points(aligned, t0, t0 + width / 2) == []


def test_align_comb_keeps_thermal_quantities(crystal):
    for off in (0.0, 0.3, 1.1):
        moved = align_comb(crystal, off)
        assert abs(moved.n0_fund - crystal.n0_fund) <= crystal.wavelength / (4 * crystal.length) + 1e-15
        assert comb_offset(moved) == pytest.approx(off % fsr_temperature(crystal), abs=1e-9)
        assert fsr_temperature(moved) == fsr_temperature(crystal)


def test_comb_offset_matches_resonances(crystal):
    off = comb_offset(crystal)
    assert 0 <= off < fsr_temperature(crystal)
    t = resonance_temperatures(crystal, crystal.t_ref, crystal.t_ref + 2)[0].temperature
    assert t - crystal.t_ref == pytest.approx(off, abs=1e-12)


def test_scan_table(crystal, opo1):
    table = scan_table(crystal, opo1, crystal.t_ref - 2, crystal.t_ref + 2, 1e-3)
    assert list(table) == ["temperature_C", "transmission", "eta"]
    assert len(table["temperature_C"]) == 4001
    i = int(np.argmin(np.abs(table["temperature_C"] - crystal.t_ref)))
    assert table["eta"][i] == pytest.approx(1.0, abs=1e-12)
    assert table["eta"].max() == pytest.approx(1.0, abs=1e-12)


def test_scan_table_peak_spacing_and_envelope(crystal, opo1):
    table = scan_table(crystal, opo1, crystal.t_ref - 2, crystal.t_ref + 2, 1e-4)
    t, tr, eta = table["temperature_C"], table["transmission"], table["eta"]
    peaks = t[1:-1][(tr[1:-1] > tr[:-2]) & (tr[1:-1] >= tr[2:]) & (tr[1:-1] > 0.5)]
    assert np.allclose(np.diff(peaks), 1.2045, atol=2e-4)
    above = t[eta >= 0.5]
    assert above[-1] - above[0] == pytest.approx(2.49, abs=2e-3)


def test_scan_table_coarse_step_gives_endpoints(crystal, opo1):
    table = scan_table(crystal, opo1, 39.0, 40.0, 5.0)
    assert list(table["temperature_C"]) == [39.0, 40.0]


def test_scan_table_rejects_bad_step(crystal, opo1):
    with pytest.raises(ValueError):
        scan_table(crystal, opo1, 39.0, 40.0, 0.0)
