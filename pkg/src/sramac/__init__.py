"""Behavioral simulator for analog in-SRAM multiply-accumulate readout.

Models the bit-line discharge of 6T bitcells driven by DAC-coded word
lines, the effect of forward body bias on the access transistor's
threshold, binary-weighted charge-share readout, and Monte-Carlo
accuracy statistics under process variation.
"""

from .cell import (
    BitcellConfig,
    ClosedFormPoint,
    DischargeTrace,
    M3Mode,
    SamplePoint,
    closed_form_vblb,
    sample_vblb,
    simulate_discharge,
    wl_pulse_width_max,
)
from .dac import (
    DacConfig,
    DacScheme,
    WlWindow,
    code_to_vwl,
    level_step,
    vwl_margin,
    with_body_bias,
)
from .device import (
    BiasPoint,
    DeviceParams,
    OperatingRegion,
    drain_current,
    effective_vth,
    region,
)
from .energy import EnergyReport, mac_energy
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    RangeError,
    ResampleExhausted,
    SimError,
)
from .mac_array import (
    ArrayConfig,
    LevelTable,
    MacResult,
    exhaustive_mac,
    nominal_levels,
    quantize,
    run_mac,
    store_operand,
    with_v_bulk,
)
from .variation import (
    CaseComparison,
    ComparisonReport,
    GlobalDraws,
    McStats,
    VariationModel,
    compare_bias,
    run_mc,
    sample_params,
    sample_trial_devices,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig",
    "BiasPoint",
    "BitcellConfig",
    "CaseComparison",
    "ClosedFormPoint",
    "ComparisonReport",
    "ConfigError",
    "ConvergenceError",
    "DacConfig",
    "DacScheme",
    "DegenerateError",
    "DeviceParams",
    "DischargeTrace",
    "DomainError",
    "EnergyReport",
    "GlobalDraws",
    "LevelTable",
    "M3Mode",
    "MacResult",
    "McStats",
    "OperatingRegion",
    "RangeError",
    "ResampleExhausted",
    "SamplePoint",
    "SimError",
    "VariationModel",
    "WlWindow",
    "closed_form_vblb",
    "code_to_vwl",
    "compare_bias",
    "drain_current",
    "effective_vth",
    "exhaustive_mac",
    "level_step",
    "mac_energy",
    "nominal_levels",
    "quantize",
    "region",
    "run_mac",
    "run_mc",
    "sample_params",
    "sample_trial_devices",
    "sample_vblb",
    "simulate_discharge",
    "store_operand",
    "trial_rng",
    "vwl_margin",
    "with_body_bias",
    "with_v_bulk",
]
