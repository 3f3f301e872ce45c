"""
The three-stage lock
====================

The cavity is held on resonance with a Pound-Drever-Hall signal acting on the
crystal heater. Once it holds, the pump-probe phase is locked, then the
probe-LO phase. Residual jitter of the last loop is what the noise model
calls ``theta_tilde``.
"""

# %%
import numpy as np

from monopo.config import load_config
from monopo.locksim import pdh_error, phase_error, simulate_lock

config = load_config("opo1").lock
print(f"f0 {config.f0 / 1e6:.1f} MHz, {config.detuning_per_kelvin / 1e6:.0f} MHz per K, "
      f"heater step {config.temperature_resolution * 1e3:.0f} mK")

# %%
# Discriminants
# -------------
d = np.linspace(-2, 2, 9) * config.f0
print("PDH  ", np.round(pdh_error(d, config.f0, config.modulation), 4))
print("phase", np.round(phase_error(np.linspace(-np.pi, np.pi, 9)), 4))

# %%
# A 30 s run from 10 MHz detuning
# -------------------------------
from dataclasses import replace

result = simulate_lock(replace(config, initial_detuning=10e6), 30.0, seed=0)
s = result.summary
for stage, t in s["acquisition_time_s"].items():
    print(f"{stage:10s} acquired at {t:.3f} s")
print(f"rms detuning {s['residual_rms_detuning_hz'] / 1e3:.0f} kHz")
print(f"theta_tilde {s['theta_tilde_deg']:.2f} deg")

# %%
# Too much sensor noise on the cavity loop and the cascade never starts.
noisy = replace(config, cavity=replace(config.cavity, noise=1.0))
print("acquired:", simulate_lock(noisy, 10.0).summary["acquired"])
