"""Digital-code to word-line-voltage mapping.

Two coding schemes are supported.  Both span the window from the
threshold floor (code 0) to the supply (max code):

    linear:  v_wl = floor + (vdd - floor) *       c / (2^N - 1)
    sqrt:    v_wl = floor + (vdd - floor) * sqrt(c / (2^N - 1))

The sqrt scheme makes the squared overdrive, and hence a saturated
square-law discharge, linear in the code.  The published form of the
sqrt mapping (square root of the full voltage product) overshoots the
supply at max code; the normalized form above keeps the intended
endpoints and the linear-discharge property.

A word-line amplitude above ``vwl_max`` is reported with a warning but
not clamped: clamping would break the pinned code-to-voltage endpoints
and collapse the upper codes onto one level.  ``vwl_max`` is the
reliability ceiling used for usable-window reporting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

from .device import DeviceParams, effective_vth
from .errors import DomainError, RangeError

VTH_FLOOR_DEFAULT = 0.300  # V, calibrated baseline word-line floor
VWL_MAX_DEFAULT = 0.700    # V, reliability ceiling for margin reporting


class DacScheme(Enum):
    LINEAR = "linear"
    SQRT = "sqrt"


@dataclass(frozen=True)
class DacConfig:
    n_bits: int = 4
    vdd: float = 1.0
    vth_eff: float = VTH_FLOOR_DEFAULT  # code-0 floor: access device's effective vth
    scheme: DacScheme = DacScheme.SQRT
    vwl_max: float = VWL_MAX_DEFAULT

    def __post_init__(self):
        if not 1 <= self.n_bits <= 8:
            raise DomainError(f"n_bits must be in [1, 8], got {self.n_bits}")
        if not 0.0 < self.vth_eff < self.vdd:
            raise DomainError(
                f"vth_eff must be in (0, vdd={self.vdd}), got {self.vth_eff}"
            )

    @property
    def max_code(self) -> int:
        return 2 ** self.n_bits - 1


class WlWindow(NamedTuple):
    floor: float
    ceiling: float

    @property
    def width(self) -> float:
        return self.ceiling - self.floor


def code_to_vwl(cfg: DacConfig, code: int) -> float:
    """Word-line voltage for a digital operand code.

    Strictly increasing in code; code 0 pins the floor and the max code
    pins vdd exactly.
    """
    if not 0 <= code <= cfg.max_code:
        raise RangeError(f"code must be in [0, {cfg.max_code}], got {code}")
    if code == 0:
        return cfg.vth_eff
    if code == cfg.max_code:
        v = cfg.vdd
    else:
        frac = code / cfg.max_code
        if cfg.scheme is DacScheme.SQRT:
            frac = math.sqrt(frac)
        v = cfg.vth_eff + (cfg.vdd - cfg.vth_eff) * frac
    if v > cfg.vwl_max:
        warnings.warn(
            "word-line voltage exceeds the vwl_max reliability ceiling",
            stacklevel=2,
        )
    return v


def vwl_margin(cfg: DacConfig) -> WlWindow:
    """Usable word-line window (floor, ceiling).

    The ceiling is min(vdd, vwl_max).  A degenerate window (floor >=
    ceiling) is reported, not raised.
    """
    return WlWindow(cfg.vth_eff, min(cfg.vdd, cfg.vwl_max))


def level_step(cfg: DacConfig) -> float:
    """Per-code spacing of the quantity the scheme makes uniform.

    Linear: word-line voltage step [V].  Sqrt: step of the squared
    overdrive [V^2], the quantity proportional to the saturated
    discharge per code.
    """
    window = cfg.vdd - cfg.vth_eff
    if cfg.scheme is DacScheme.LINEAR:
        return window / cfg.max_code
    return window * window / cfg.max_code


def with_body_bias(cfg: DacConfig, dev: DeviceParams, v_bulk: float) -> DacConfig:
    """DAC window under a forward bulk bias on the access device.

    The floor drops by exactly the device's threshold reduction, so at
    the calibrated defaults a 0.6 V bulk bias moves the floor from
    0.300 V to 0.175 V.
    """
    reduction = effective_vth(dev, 0.0) - effective_vth(dev, -v_bulk)
    return replace(cfg, vth_eff=cfg.vth_eff - reduction)
