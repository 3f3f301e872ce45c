"""TOML configuration for the toolkit.

Every physical key carries its unit in the name (``length_mm``,
``f0_mhz``...) and is converted to SI on load. Unknown keys are rejected.
"""
from __future__ import annotations

import math
import os
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import OpoReportEntry
from .cavity import CavitySpec, cavity_hwhm
from .dispersion import CrystalSpec
from .locksim import LockConfig, ModulationConfig, ServoConfig, default_lock_config
from .squeezing import SqueezingParams, propagation_efficiency

OUTPUT_DIR_ENV = "MONOPO_OUTPUT_DIR"
SHIPPED = ("opo1", "opo2", "opo3")


class ConfigError(ValueError):
    pass


# key -> (field name, scale to SI)
_CRYSTAL_KEYS = {
    "length_mm": ("length", 1e-3),
    "wavelength_nm": ("wavelength", 1e-9),
    "n0_fund": ("n0_fund", 1.0),
    "n0_sh": ("n0_sh", 1.0),
    "dn_dT_fund_per_K": ("dn_dT_fund", 1.0),
    "dn_dT_sh_per_K": ("dn_dT_sh", 1.0),
    "t_ref_C": ("t_ref", 1.0),
    "poling_period_um": ("poling_period", 1e-6),
}
_CAVITY_KEYS = {
    "output_coupler_T": ("output_coupler_T", 1.0),
    "intra_cavity_loss_L": ("intra_cavity_loss_L", 1.0),
    "hr_transmittance": ("hr_transmittance", 1.0),
}
_SQUEEZING_KEYS = {
    "kappa": ("kappa", 1.0),
    "f0_mhz": ("f0", 1e6),
    "theta_tilde_deg": ("theta_tilde", math.pi / 180),
    "p_threshold_mw": ("p_threshold", 1e-3),
}
_EFFICIENCY_KEYS = ("homodyne_visibility", "path_efficiency", "detector_qe")
_REPORT_KEYS = {
    "pump_squeezing_mw": ("pump_squeezing", 1e-3),
    "pump_bandwidth_mw": ("pump_bandwidth", 1e-3),
    "f_measure_mhz": ("f_measure", 1e6),
}
_LOCK_KEYS = {
    "sample_dt_s": ("sample_dt", 1.0),
    "temperature_resolution_K": ("temperature_resolution", 1.0),
    "hold_samples": ("hold_samples", None),
    "initial_detuning_mhz": ("initial_detuning", 1e6),
    "initial_phase_pp_rad": ("initial_phase_pp", 1.0),
    "initial_phase_plo_rad": ("initial_phase_plo", 1.0),
}
_MODULATION_KEYS = {
    "pdh_mod_freq_mhz": ("pdh_mod_freq", 1e6),
    "pdh_mod_depth_rad": ("pdh_mod_depth", 1.0),
    "phase_mod_freq_khz": ("phase_mod_freq", 1e3),
    "phase_mod_depth_rad": ("phase_mod_depth", 1.0),
    "demod_phase_rad": ("demod_phase", 1.0),
    "coupling": ("coupling", 1.0),
}
_SERVO_KEYS = {
    "kp": ("kp", 1.0),
    "ki": ("ki", 1.0),
    "kd": ("kd", 1.0),
    "actuator_time_constant_s": ("actuator_time_constant", 1.0),
    "actuator_range": ("actuator_range", 1.0),
    "noise": ("noise", 1.0),
    "capture_threshold": ("capture_threshold", 1.0),
}
_TOP_KEYS = {"label", "output_dir", "crystal", "cavity", "squeezing", "report", "locksim"}


@dataclass(frozen=True)
class ToolkitConfig:
    label: str
    crystal: CrystalSpec
    cavity: CavitySpec
    squeezing: SqueezingParams
    report: OpoReportEntry
    lock: LockConfig
    output_dir: Path


def _convert(section: dict, table: dict, where: str, extra: tuple = ()) -> dict:
    unknown = set(section) - set(table) - set(extra)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(unknown))}")
    out = {}
    for key, value in section.items():
        if key in extra:
            continue
        name, scale = table[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{where}] {key} must be a number, got {value!r}")
        out[name] = int(value) if scale is None else float(value) * scale
    return out


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return value


def parse_config(doc: dict) -> ToolkitConfig:
    """Build a :class:`ToolkitConfig` from a parsed TOML document."""
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")
    try:
        crystal = CrystalSpec(**_convert(_section(doc, "crystal"), _CRYSTAL_KEYS, "crystal"))
        cavity = CavitySpec(**_convert(_section(doc, "cavity"), _CAVITY_KEYS, "cavity"))

        sq_doc = _section(doc, "squeezing")
        sq = _convert(sq_doc, _SQUEEZING_KEYS, "squeezing", extra=_EFFICIENCY_KEYS)
        parts = [k for k in _EFFICIENCY_KEYS if k in sq_doc]
        if parts:
            if "kappa" in sq:
                raise ConfigError("[squeezing] give either kappa or the efficiency budget, not both")
            if len(parts) != len(_EFFICIENCY_KEYS):
                raise ConfigError(f"[squeezing] efficiency budget needs all of {_EFFICIENCY_KEYS}")
            sq["kappa"] = propagation_efficiency(*(float(sq_doc[k]) for k in _EFFICIENCY_KEYS))
        sq.setdefault("f0", cavity_hwhm(crystal, cavity))
        squeezing = SqueezingParams(
            oc_T=cavity.output_coupler_T, loss_L=cavity.intra_cavity_loss_L, **sq
        )

        rep = _convert(_section(doc, "report"), _REPORT_KEYS, "report")
        label = str(doc.get("label", "OPO"))
        rep.setdefault("pump_squeezing", squeezing.p_threshold / 2)
        rep.setdefault("pump_bandwidth", rep["pump_squeezing"])
        report = OpoReportEntry(label, squeezing, **rep)

        lock_doc = dict(_section(doc, "locksim"))
        subsections = {k: lock_doc.pop(k) for k in ("modulation", "cavity", "pump_probe", "probe_lo")
                       if k in lock_doc}
        lock_top = _convert(lock_doc, _LOCK_KEYS, "locksim")
        modulation = ModulationConfig(
            **_convert(subsections.get("modulation", {}), _MODULATION_KEYS, "locksim.modulation")
        )
        lock = default_lock_config(crystal, cavity, f0=squeezing.f0, modulation=modulation)
        servos = {}
        for name in ("cavity", "pump_probe", "probe_lo"):
            fields = _convert(subsections.get(name, {}), _SERVO_KEYS, f"locksim.{name}")
            servos[name] = replace(getattr(lock, name), **fields)
        lock = replace(lock, **lock_top, **servos)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    out = os.environ.get(OUTPUT_DIR_ENV) or doc.get("output_dir", ".")
    return ToolkitConfig(label, crystal, cavity, squeezing, report, lock, Path(out))


def load_config(source: str | os.PathLike) -> ToolkitConfig:
    """Load a config file, or one of the shipped names ``opo1``, ``opo2``, ``opo3``."""
    if str(source) in SHIPPED:
        text = resources.files("monopo.configs").joinpath(f"{source}.toml").read_text()
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return parse_config(doc)
