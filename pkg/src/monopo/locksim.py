"""Discrete-time simulation of the three-stage locking cascade.

Stage 1 holds the cavity on resonance with a Pound-Drever-Hall error signal
acting on the crystal temperature. Stage 2 locks the pump-probe relative
phase with a slow dither, stage 3 the probe-LO phase seen by the homodyne
detector. A stage only starts actuating once the stage before it has held
its error inside the capture threshold for ``hold_samples`` samples.

Units: errors are dimensionless, the cavity actuator is in K and the phase
actuators in rad. Noise is seeded white Gaussian noise added to each error
signal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import j0, j1

from .cavity import CavitySpec, cavity_hwhm, detuning_slope
from .coresonance import comb_offset
from .dispersion import CrystalSpec

STAGES = ("cavity", "pump_probe", "probe_lo")
SERIES_COLUMNS = ("time_s", "temperature_C", "detuning_Hz", "phase_pp_rad", "phase_plo_rad")


@dataclass(frozen=True)
class ModulationConfig:
    pdh_mod_freq: float = 36.7e6
    pdh_mod_depth: float = 1.08
    phase_mod_freq: float = 130e3
    phase_mod_depth: float = 0.1
    demod_phase: float = 0.0
    coupling: float = 1.0  # on-resonance reflection dip depth of the probe port


@dataclass(frozen=True)
class ServoConfig:
    """PID gains and actuator of one loop.

    The controller output is ``-(kp*e + ki*int(e) + kd*de/dt)``, clipped to
    ``+-actuator_range``; the actuator follows it with a first-order lag.
    """

    kp: float
    ki: float
    kd: float = 0.0
    actuator_time_constant: float = 1.0
    actuator_range: float = 0.5
    noise: float = 0.0
    capture_threshold: float = 0.05

    def __post_init__(self):
        if not self.actuator_time_constant > 0:
            raise ValueError("actuator_time_constant must be positive")
        if not self.actuator_range > 0:
            raise ValueError("actuator_range must be positive")
        if self.noise < 0 or not self.capture_threshold > 0:
            raise ValueError("need noise >= 0 and capture_threshold > 0")


@dataclass(frozen=True)
class LockConfig:
    cavity: ServoConfig
    pump_probe: ServoConfig
    probe_lo: ServoConfig
    f0: float
    detuning_per_kelvin: float
    t_resonance: float
    modulation: ModulationConfig = field(default_factory=ModulationConfig)
    sample_dt: float = 1e-3
    temperature_resolution: float = 1e-3
    hold_samples: int = 100
    initial_detuning: float = 0.0
    initial_phase_pp: float = 0.3
    initial_phase_plo: float = 0.3

    def __post_init__(self):
        if not self.sample_dt > 0:
            raise ValueError("sample_dt must be positive")
        if not self.temperature_resolution > 0:
            raise ValueError("temperature_resolution must be positive")
        if not self.f0 > 0:
            raise ValueError("f0 must be positive")
        for name in STAGES:
            tau = getattr(self, name).actuator_time_constant
            if self.sample_dt > tau / 10:
                raise ValueError(
                    f"sample_dt {self.sample_dt} s does not resolve the {name} actuator "
                    f"(time constant {tau} s; need dt <= tau/10)"
                )
        # the dither lock must sit far below the cavity bandwidth
        if not self.modulation.phase_mod_freq < self.f0 / 10:
            raise ValueError(
                f"phase modulation at {self.modulation.phase_mod_freq:g} Hz is not well below "
                f"the cavity half width {self.f0:g} Hz"
            )

    @property
    def pdh_fast_regime(self) -> bool:
        """True when the PDH sidebands fall outside the cavity line."""
        return self.modulation.pdh_mod_freq > self.f0

    def servo(self, stage: str) -> ServoConfig:
        return getattr(self, stage)


@dataclass(frozen=True)
class LoopState:
    integral: float = 0.0
    last_error: float = 0.0
    command: float = 0.0
    output: float = 0.0
    hold: int = 0
    engaged: bool = False
    acquired: bool = False
    saturated: bool = False


@dataclass(frozen=True)
class PlantState:
    temperature: float
    detuning: float
    relative_phase_pump_probe: float
    relative_phase_probe_lo: float
    time: float = 0.0
    loops: tuple[LoopState, LoopState, LoopState] = (LoopState(), LoopState(), LoopState())


# ---------------------------------------------------------------------------
# discriminants
# ---------------------------------------------------------------------------


def _reflection(detuning, f0, coupling):
    return 1 - coupling / (1 + 1j * detuning / f0)


def pdh_error(detuning, f0: float, mod: ModulationConfig = ModulationConfig()):
    """Pound-Drever-Hall error signal for a Lorentzian cavity line.

    Beats the carrier against both sidebands at ``+-pdh_mod_freq`` and
    demodulates at ``demod_phase``. Odd in detuning for any demodulation
    phase; a shift of ``pi`` flips the sign.
    """
    if not f0 > 0:
        raise ValueError("f0 must be positive")
    d = np.asarray(detuning, dtype=float)
    w = mod.pdh_mod_freq
    beat = _reflection(d, f0, mod.coupling) * np.conj(
        _reflection(d + w, f0, mod.coupling)
    ) - np.conj(_reflection(d, f0, mod.coupling)) * _reflection(d - w, f0, mod.coupling)
    scale = 2 * j0(mod.pdh_mod_depth) * j1(mod.pdh_mod_depth)
    out = scale * np.imag(np.exp(-1j * mod.demod_phase) * beat)
    return out[()] if out.ndim == 0 else out


def pdh_slope(f0: float, mod: ModulationConfig = ModulationConfig()) -> float:
    """d(error)/d(detuning) at resonance, per Hz."""
    h = f0 * 1e-6
    return float((pdh_error(h, f0, mod) - pdh_error(-h, f0, mod)) / (2 * h))


def phase_error(relative_phase, mod_depth: float = 0.1):
    """Dither-lock discriminant, normalized to unit slope as the depth goes to 0."""
    norm = 2 * j1(mod_depth) / mod_depth if mod_depth != 0 else 1.0
    out = norm * np.sin(np.asarray(relative_phase, dtype=float))
    return out[()] if out.ndim == 0 else out


def tune_pi(plant_gain: float, time_constant: float, loop_gain: float = 2.0):
    """PI gains cancelling a first-order plant pole.

    Returns ``(kp, ki)`` such that the open loop is ``loop_gain / (tau s)``,
    i.e. a first-order closed loop with bandwidth ``loop_gain / tau`` and no
    overshoot.
    """
    if plant_gain == 0:
        raise ValueError("plant gain is zero")
    kp = loop_gain / plant_gain
    return kp, kp / time_constant


def default_lock_config(
    crystal: CrystalSpec,
    cavity: CavitySpec,
    f0: float | None = None,
    modulation: ModulationConfig = ModulationConfig(),
    **overrides,
) -> LockConfig:
    """Lock configuration with PI gains tuned on the linearized loops.

    Thermal plant: 1 s time constant, +-0.5 K range. Phase actuators: 10 ms,
    +-pi. The cavity capture threshold is the error at 5 % of ``f0`` and its
    sensor noise the error at 1 % of ``f0``. Phase-loop noise levels are
    chosen so the probe-LO residual lands near 2 deg.
    """
    f0 = cavity_hwhm(crystal, cavity) if f0 is None else f0
    g = detuning_slope(crystal)
    tau_t, tau_p = 1.0, 10e-3
    slope = pdh_slope(f0, modulation)
    kp_c, ki_c = tune_pi(slope * g, tau_t)
    kp_p, ki_p = tune_pi(1.0, tau_p)
    settings = dict(
        cavity=ServoConfig(kp_c, ki_c, 0.0, tau_t, 0.5, noise=0.01 * slope * f0,
                           capture_threshold=0.05 * slope * f0),
        pump_probe=ServoConfig(kp_p, ki_p, 0.0, tau_p, math.pi, noise=0.05, capture_threshold=0.5),
        probe_lo=ServoConfig(kp_p, ki_p, 0.0, tau_p, math.pi, noise=0.10, capture_threshold=0.5),
        f0=f0,
        detuning_per_kelvin=g,
        t_resonance=crystal.t_ref + comb_offset(crystal),
        modulation=modulation,
    )
    settings.update(overrides)
    return LockConfig(**settings)


def initial_state(config: LockConfig) -> PlantState:
    return PlantState(
        temperature=config.t_resonance + config.initial_detuning / config.detuning_per_kelvin,
        detuning=config.initial_detuning,
        relative_phase_pump_probe=config.initial_phase_pp,
        relative_phase_probe_lo=config.initial_phase_plo,
    )


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------


def _pdh_scalar(d: float, f0: float, mod: ModulationConfig, scale: float) -> float:
    # same expression as pdh_error, on Python complex numbers
    c = mod.coupling
    r0 = 1 - c / (1 + 1j * d / f0)
    rp = 1 - c / (1 + 1j * (d + mod.pdh_mod_freq) / f0)
    rm = 1 - c / (1 + 1j * (d - mod.pdh_mod_freq) / f0)
    beat = r0 * rp.conjugate() - r0.conjugate() * rm
    rot = complex(math.cos(mod.demod_phase), -math.sin(mod.demod_phase))
    return scale * (rot * beat).imag


def _measured_errors(state: PlantState, config: LockConfig, noise) -> tuple[float, float, float]:
    mod = config.modulation
    scale = 2 * float(j0(mod.pdh_mod_depth) * j1(mod.pdh_mod_depth))
    norm = float(phase_error(math.pi / 2, mod.phase_mod_depth))
    transmission = 1.0 / (1.0 + (state.detuning / config.f0) ** 2)
    e_cav = _pdh_scalar(state.detuning, config.f0, mod, scale)
    e_pp = transmission * norm * math.sin(state.relative_phase_pump_probe)
    e_plo = transmission * norm * math.sin(state.relative_phase_probe_lo)
    return (
        e_cav + config.cavity.noise * float(noise[0]),
        e_pp + config.pump_probe.noise * float(noise[1]),
        e_plo + config.probe_lo.noise * float(noise[2]),
    )


def _update_loop(loop: LoopState, servo: ServoConfig, error: float, engaged: bool,
                 dt: float, hold_samples: int) -> LoopState:
    if not engaged:
        return loop
    integral = loop.integral if loop.saturated else loop.integral + error * dt
    derivative = (error - loop.last_error) / dt if loop.engaged else 0.0
    u = -(servo.kp * error + servo.ki * integral + servo.kd * derivative)
    saturated = abs(u) > servo.actuator_range
    if saturated:
        u = math.copysign(servo.actuator_range, u)
    hold = loop.hold + 1 if abs(error) < servo.capture_threshold else 0
    return replace(
        loop,
        integral=integral,
        last_error=error,
        command=u,
        hold=hold,
        engaged=True,
        acquired=loop.acquired or hold >= hold_samples,
        saturated=saturated,
    )


def step(state: PlantState, config: LockConfig, noise=(0.0, 0.0, 0.0)) -> PlantState:
    """Advance the cascade by one sample.

    ``noise`` holds three standard-normal draws, scaled by each loop's
    ``noise`` amplitude and added to the measured errors. Saturation is
    reported in ``LoopState.saturated``.
    """
    dt = config.sample_dt
    errors = _measured_errors(state, config, noise)
    cav, pp, plo = state.loops
    cav = _update_loop(cav, config.cavity, errors[0], True, dt, config.hold_samples)
    pp = _update_loop(pp, config.pump_probe, errors[1], cav.acquired, dt, config.hold_samples)
    plo = _update_loop(plo, config.probe_lo, errors[2], pp.acquired, dt, config.hold_samples)

    # actuators: first-order lag toward the command; heater setpoint is quantized
    res = config.temperature_resolution
    heater = res * round(cav.command / res)
    loops = []
    for loop, servo, target in ((cav, config.cavity, heater),
                                (pp, config.pump_probe, pp.command),
                                (plo, config.probe_lo, plo.command)):
        alpha = -math.expm1(-dt / servo.actuator_time_constant)
        loops.append(replace(loop, output=loop.output + alpha * (target - loop.output)))
    cav, pp, plo = loops

    t_start = config.t_resonance + config.initial_detuning / config.detuning_per_kelvin
    temperature = t_start + cav.output
    return PlantState(
        temperature=temperature,
        detuning=(temperature - config.t_resonance) * config.detuning_per_kelvin,
        relative_phase_pump_probe=config.initial_phase_pp + pp.output,
        relative_phase_probe_lo=config.initial_phase_plo + plo.output,
        time=state.time + dt,
        loops=(cav, pp, plo),
    )


@dataclass
class LockResult:
    series: dict[str, np.ndarray]
    engaged: np.ndarray  # (n, 3) bool
    acquired: np.ndarray  # (n, 3) bool
    saturated: np.ndarray  # (n, 3) bool
    outputs: np.ndarray  # (n, 3) actuator outputs
    summary: dict


def residual_phase_to_theta(phases) -> float:
    """RMS deviation of a locked phase record from its mean, in rad."""
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise ValueError("empty phase series")
    return float(np.sqrt(np.mean((phases - phases.mean()) ** 2)))


def _first_true(flags: np.ndarray):
    idx = np.flatnonzero(flags)
    return int(idx[0]) if idx.size else None


def simulate_lock(config: LockConfig, duration: float, seed: int = 0,
                  state: PlantState | None = None) -> LockResult:
    """Run the cascade for ``duration`` seconds from ``state`` (default: config start)."""
    tau = config.cavity.actuator_time_constant
    if duration < 10 * tau:
        raise ValueError(f"duration {duration} s is shorter than 10 thermal time constants ({tau} s)")
    n = int(round(duration / config.sample_dt))
    noise = np.random.default_rng(seed).standard_normal((n, 3))
    state = initial_state(config) if state is None else state

    cols = np.empty((n + 1, 5))
    engaged = np.zeros((n + 1, 3), dtype=bool)
    acquired = np.zeros((n + 1, 3), dtype=bool)
    saturated = np.zeros((n + 1, 3), dtype=bool)
    outputs = np.zeros((n + 1, 3))

    def record(i, s):
        cols[i] = (s.time, s.temperature, s.detuning,
                   s.relative_phase_pump_probe, s.relative_phase_probe_lo)
        for k, loop in enumerate(s.loops):
            engaged[i, k] = loop.engaged
            acquired[i, k] = loop.acquired
            saturated[i, k] = loop.saturated
            outputs[i, k] = loop.output

    record(0, state)
    for i in range(n):
        state = step(state, config, noise[i])
        record(i + 1, state)

    series = dict(zip(SERIES_COLUMNS, cols.T.copy()))
    times = [_first_true(acquired[:, k]) for k in range(3)]
    summary = {
        "acquired": all(t is not None for t in times),
        "acquisition_time_s": {
            name: (None if t is None else float(cols[t, 0])) for name, t in zip(STAGES, times)
        },
        "saturated_samples": int(saturated.any(axis=1).sum()),
        "residual_rms_detuning_hz": None,
        "residual_rms_phase_pp_rad": None,
        "residual_rms_phase_rad": None,
        "theta_tilde_rad": None,
        "theta_tilde_deg": None,
    }
    if times[0] is not None:
        det = series["detuning_Hz"][times[0]:]
        summary["residual_rms_detuning_hz"] = float(np.sqrt(np.mean(det**2)))
    if times[1] is not None:
        summary["residual_rms_phase_pp_rad"] = residual_phase_to_theta(
            series["phase_pp_rad"][times[1]:]
        )
    if times[2] is not None:
        theta = residual_phase_to_theta(series["phase_plo_rad"][times[2]:])
        summary["residual_rms_phase_rad"] = theta
        summary["theta_tilde_rad"] = theta
        summary["theta_tilde_deg"] = math.degrees(theta)
    return LockResult(series, engaged, acquired, saturated, outputs, summary)
