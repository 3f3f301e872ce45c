"""Design and analysis toolkit for temperature-tuned monolithic OPO squeezers."""

from .cavity import (
    CavitySpec,
    cavity_hwhm,
    escape_efficiency,
    fsr_frequency,
    fsr_temperature,
    resonance_temperatures,
    temperature_linewidth,
    transmission_profile,
)
from .coresonance import co_resonant_points, scan_table, worst_case_best_eta
from .dispersion import CrystalSpec, Wave, delta_n, refractive_index
from .phasematch import WidthCriterion, conversion_efficiency, delta_k, phase_matching_width
from .squeezing import (
    Quadrature,
    SqueezingParams,
    from_db,
    propagation_efficiency,
    pump_sweep,
    pump_to_x,
    spectrum,
    squeezing_bandwidth,
    to_db,
    variance,
    variance_with_phase_noise,
)

__version__ = "0.1.0"
