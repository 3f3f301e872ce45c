"""Acceptance gates, one per criterion.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``;
either way each criterion prints a single PASS/FAIL line.
"""
import math
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from monopo.analysis import dark_corrected_db, fit_model, fit_theta, synthetic_observations
from monopo.cavity import CavitySpec, cavity_hwhm, escape_efficiency, fsr_temperature, temperature_linewidth
from monopo.coresonance import worst_case_best_eta
from monopo.dispersion import CrystalSpec
from monopo.locksim import default_lock_config, initial_state, simulate_lock, step
from monopo.phasematch import WidthCriterion, phase_matching_width
from monopo.squeezing import (
    Quadrature,
    SqueezingParams,
    propagation_efficiency,
    squeezing_bandwidth,
    to_db,
    variance,
    variance_with_phase_noise,
)

CRYSTAL = CrystalSpec()
OPO = {1: CavitySpec(0.118, 0.008), 2: CavitySpec(0.082, 0.008), 3: CavitySpec(0.044, 0.008)}
HEADLINE = SqueezingParams(kappa=0.968, oc_T=0.118, loss_L=0.008, f0=82e6,
                           theta_tilde=math.radians(2.0), p_threshold=0.283)
X_HEADLINE = math.sqrt(130 / 283)


def check(cond, detail):
    if not cond:
        raise AssertionError(detail)
    return detail


def ac01():
    v = fsr_temperature(CRYSTAL)
    return check(abs(v - 1.204) < 0.01, f"dT_FSR = {v:.5f} K (gate |v - 1.204| < 0.01)")


def ac02():
    hm = phase_matching_width(CRYSTAL, WidthCriterion.HALF_MAX)
    pi = phase_matching_width(CRYSTAL, WidthCriterion.PI_BOUND)
    ok = abs(hm - 2.49) < 0.05 and abs(hm - 2.5) < 0.1 and abs(pi - 2.81) < 0.01
    return check(ok, f"dT_PM half-max = {hm:.4f} K, pi-bound = {pi:.4f} K")


def ac03():
    v = worst_case_best_eta(CRYSTAL)
    fsr = fsr_temperature(CRYSTAL)
    # brute-force oracle from the raw constants: for each comb offset take the
    # best resonance within one comb period of the peak, then the worst offset
    c = CRYSTAL
    dk_per_k = 4 * math.pi / c.wavelength * (c.dn_dT_sh - c.dn_dT_fund)
    offsets = np.linspace(0, fsr, 2001)[:, None]
    temps = offsets + fsr * np.arange(-2, 3)[None, :]
    eta = np.sinc(dk_per_k * temps * c.length / 2 / math.pi) ** 2
    brute = eta.max(axis=1).min()
    ok = 0.855 <= v <= 0.865 and abs(v - brute) < 1e-4
    return check(ok, f"worst-case best eta = {v:.6f}, brute force = {brute:.6f} (gate [0.855, 0.865])")


def ac04():
    v = escape_efficiency(OPO[1])
    return check(abs(v - 0.937) < 0.001, f"escape efficiency = {v:.5f} (gate 0.937 +- 0.001)")


def ac05():
    k = propagation_efficiency(0.986, 0.998, 0.998)
    ok = abs(k - 0.968) < 0.001 and abs((1 - k) - 0.032) < 0.001
    return check(ok, f"kappa = {k:.5f}, 1 - kappa = {100 * (1 - k):.2f} %")


def ac06():
    v = to_db(variance_with_phase_noise(Quadrature.SQUEEZED, X_HEADLINE, 2e6, HEADLINE))
    return check(abs(v + 8.0) <= 0.15, f"R'- = {v:.3f} dB (gate -8.0 +- 0.15)")


def ac07():
    f = [cavity_hwhm(CRYSTAL, OPO[i]) / 1e6 for i in (1, 2, 3)]
    return check(abs(f[0] - 82) <= 3, f"HWHM No.1 = {f[0]:.2f} MHz (gate 82 +- 3); "
                                      f"No.2 = {f[1]:.1f}, No.3 = {f[2]:.1f} MHz not gated")


def ac08():
    v = temperature_linewidth(CRYSTAL, OPO[1])
    return check(v < 0.03, f"temperature linewidth = {v:.5f} K (gate < 0.03)")


def ac09():
    bw = squeezing_bandwidth(0.6778, 82e6) / 1e6
    anti = to_db(variance_with_phase_noise(Quadrature.ANTI_SQUEEZED, X_HEADLINE, 2e6, HEADLINE))
    # the measured 16.0 dB anti-squeezing is not reachable with these parameters
    ok = abs(bw - 142) <= 0.05 * 142 and abs(anti - 13.9) < 0.05 and anti < 16.0 - 1.0
    return check(ok, f"bandwidth = {bw:.2f} MHz (gate 142 +- 5 %); "
                     f"anti-squeezing model {anti:.2f} dB vs measured 16.0 dB (documented gap)")


def ac10():
    rng = np.random.default_rng(10)
    worst = 0.0
    for x, f0 in zip(rng.uniform(0, 0.99, 50), rng.uniform(1e6, 1e9, 50)):
        p = replace(HEADLINE, f0=f0)
        r0 = variance(Quadrature.SQUEEZED, x, 0.0, p)
        rb = variance(Quadrature.SQUEEZED, x, squeezing_bandwidth(x, f0), p)
        worst = max(worst, abs(rb - (r0 + 1) / 2))
    return check(worst <= 1e-12, f"max |R-((1+x)f0) - (R-(0)+1)/2| = {worst:.2e} over 50 pairs")


def ac11():
    powers = np.arange(10, 200, 20) * 1e-3
    one = fit_theta(synthetic_observations(HEADLINE, powers), replace(HEADLINE, theta_tilde=0.0))
    err1 = abs(one.theta_tilde_deg - 2.0)
    rng = np.random.default_rng(11)
    worst = 0.0
    for theta_deg, p_th in zip(rng.uniform(0.2, 10.0, 100), rng.uniform(0.05, 1.0, 100)):
        truth = replace(HEADLINE, theta_tilde=math.radians(theta_deg), p_threshold=p_th)
        data = synthetic_observations(truth, p_th * np.linspace(0.05, 0.8, 8))
        start = replace(truth, theta_tilde=math.radians(1.0), p_threshold=1.2 * p_th)
        res = fit_model(data, start, free=("theta_tilde", "p_threshold"))
        worst = max(worst, abs(res.theta_tilde / truth.theta_tilde - 1),
                    abs(res.params.p_threshold / p_th - 1))
    ok = err1 < 0.01 and worst < 0.005
    return check(ok, f"theta error = {err1:.2e} deg; worst joint relative error = {worst:.2e} over 100 pairs")


def ac12():
    worst = np.inf
    for kappa in (0.5, 0.9, 0.968, 0.999):
        p = replace(HEADLINE, kappa=kappa)
        assert kappa * p.escape_efficiency < 1
        x, f = np.meshgrid(np.linspace(0, 0.99, 100), np.linspace(0, 10 * p.f0, 101))
        prod = variance(Quadrature.SQUEEZED, x, f, p) * variance(Quadrature.ANTI_SQUEEZED, x, f, p)
        worst = min(worst, prod.min())
    return check(worst >= 1 - 1e-12, f"min R+ R- = {worst:.12f} on the x-f grid")


def ac13():
    cfg = default_lock_config(CRYSTAL, OPO[1], f0=82e6)
    quiet = lambda s: replace(s, noise=0.0)
    still = replace(cfg, cavity=quiet(cfg.cavity), pump_probe=quiet(cfg.pump_probe),
                    probe_lo=quiet(cfg.probe_lo), initial_phase_pp=0.0, initial_phase_plo=0.0)
    s0 = s = initial_state(still)
    stationary = True
    for _ in range(2000):
        s = step(s, still)
        stationary &= (s.temperature, s.detuning, s.relative_phase_pump_probe,
                       s.relative_phase_probe_lo) == (s0.temperature, 0.0, 0.0, 0.0)
    res0 = simulate_lock(still, 10.0)

    t0 = time.perf_counter()
    a = simulate_lock(cfg, 100.0, seed=5)
    runtime = time.perf_counter() - t0
    b = simulate_lock(cfg, 100.0, seed=5)
    identical = all(np.array_equal(a.series[k], b.series[k]) for k in a.series)

    ordered = True
    for res in (res0, a):
        for k in (1, 2):
            before = ~res.acquired[:, k - 1]
            ordered &= not res.engaged[:, k][before].any()
            ordered &= bool(np.all(res.outputs[:, k][before] == 0.0))
    ok = stationary and res0.summary["acquired"] and identical and ordered and runtime < 10
    return check(ok, f"fixed point {stationary}, acquired {res0.summary['acquired']}, "
                     f"bit-identical {identical}, ordering {ordered}, 100 s run in {runtime:.2f} s")


def ac14():
    v = dark_corrected_db(-8.0, 23.0)
    oracle = 10 * math.log10((10**-0.8 - 10**-2.3) / (1 - 10**-2.3))
    ok = abs(v + 8.12) < 0.01 and abs(v - oracle) < 1e-12
    return check(ok, f"dark-corrected level = {v:.4f} dB (gate -8.12 +- 0.01)")


CRITERIA = [
    ("AC-01 temperature free spectral range", ac01),
    ("AC-02 phase-matching width", ac02),
    ("AC-03 worst-case co-resonant efficiency", ac03),
    ("AC-04 escape efficiency", ac04),
    ("AC-05 propagation efficiency budget", ac05),
    ("AC-06 squeezing headline", ac06),
    ("AC-07 cavity half width", ac07),
    ("AC-08 temperature linewidth", ac08),
    ("AC-09 squeezing bandwidth", ac09),
    ("AC-10 bandwidth self-consistency", ac10),
    ("AC-11 fit round trip", ac11),
    ("AC-12 uncertainty ordering", ac12),
    ("AC-13 lock cascade", ac13),
    ("AC-14 dark-noise correction", ac14),
]


def run_one(name, func, out=None):
    out = sys.stdout if out is None else out
    try:
        detail = func()
    except Exception as exc:  # report, then let the caller fail
        print(f"FAIL  {name}: {exc}", file=out, flush=True)
        return False, exc
    print(f"PASS  {name}: {detail}", file=out, flush=True)
    return True, None


@pytest.mark.parametrize("name, func", CRITERIA, ids=[n.split()[0] for n, _ in CRITERIA])
def test_criterion(name, func, capsys):
    with capsys.disabled():
        print()
        ok, exc = run_one(name, func)
    if not ok:
        raise exc


if __name__ == "__main__":
    results = [run_one(name, func)[0] for name, func in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
