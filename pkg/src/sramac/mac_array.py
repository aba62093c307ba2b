"""Multi-bit analog multiplier built from one row of bitcells.

One operand is stored bitwise (MSB in the leftmost cell), the second
drives every word line with one DAC-coded amplitude.  Each stored 1
discharges its bit-line-bar; the per-bit samples are merged by an ideal
binary-weighted capacitive charge share (weights 2^i on bit
significance i), giving

    v_combined = sum_i 2^i * v_bit_i / (2^N - 1)

so the total weighted discharge is a * delta(b) / (2^N - 1) with
delta(b) the single-cell discharge at code b.  With the sqrt DAC scheme
and a saturated square-law discharge, delta(b) is proportional to b and
the combined voltage drop is exactly linear in the product a*b.

Readout is a nearest-level ideal quantizer against a nominal level
table (see :func:`nominal_levels`), not a modeled ADC.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cell import (
    DT_DIVISOR_DEFAULT,
    BitcellConfig,
    CellBatch,
    integrate_batch,
    wl_pulse_width_max,
)
from .dac import DacConfig, DacScheme, code_to_vwl
from .device import DeviceParams, OperatingRegion
from .errors import DegenerateError, DomainError, RangeError

GUARD_FRAC = 0.05          # pulse-width guard band below the saturation bound
DEGENERATE_SPACING = 1e-6  # V, minimum level separation

_REGION_BY_CODE = (
    OperatingRegion.CUTOFF,
    OperatingRegion.SATURATION,
    OperatingRegion.TRIODE,
)


@dataclass(frozen=True)
class ArrayConfig:
    """One multiplier row: cell template, DAC, timing, combination caps.

    ``dac``, ``t_pulse`` and ``t_sample`` may be left as None and are then
    derived: the DAC floor becomes the access device's effective threshold
    under the configured bulk bias (which is what makes the sqrt scheme's
    discharge linear in code), the pulse width becomes the worst-case
    (max code) saturation bound minus a 5% guard band, and the sample
    instant defaults to the pulse end.
    """

    cell: BitcellConfig = field(default_factory=BitcellConfig)
    n_bits: int = 4
    scheme: DacScheme = DacScheme.SQRT
    dac: DacConfig | None = None
    t_pulse: float | None = None
    t_sample: float | None = None
    c_unit: float = 50e-15
    dt_divisor: int = DT_DIVISOR_DEFAULT

    def __post_init__(self):
        if not 1 <= self.n_bits <= 8:
            raise DomainError(f"n_bits must be in [1, 8], got {self.n_bits}")
        if not self.c_unit > 0:
            raise DomainError(f"c_unit must be > 0, got {self.c_unit}")
        if self.dt_divisor < 100:
            raise DomainError(
                f"dt_divisor must be >= 100 (resolution floor), got {self.dt_divisor}"
            )
        if self.dac is None:
            dac = DacConfig(
                n_bits=self.n_bits,
                vdd=self.cell.vdd,
                vth_eff=self.cell.vth_access(),
                scheme=self.scheme,
                vwl_max=self.cell.vdd,
            )
            object.__setattr__(self, "dac", dac)
        else:
            if self.dac.n_bits != self.n_bits:
                raise DomainError(
                    f"dac.n_bits={self.dac.n_bits} != array n_bits={self.n_bits}"
                )
            if self.dac.vdd != self.cell.vdd:
                raise DomainError(
                    f"dac.vdd={self.dac.vdd} != cell vdd={self.cell.vdd}"
                )
            object.__setattr__(self, "scheme", self.dac.scheme)
        if self.t_pulse is None:
            bound = wl_pulse_width_max(
                replace(self.cell, stored_bit=1), self.cell.vdd
            )
            object.__setattr__(self, "t_pulse", (1.0 - GUARD_FRAC) * bound)
        if not self.t_pulse > 0:
            raise DomainError(f"t_pulse must be > 0, got {self.t_pulse}")
        if self.t_sample is None:
            object.__setattr__(self, "t_sample", self.t_pulse)
        if not 0 < self.t_sample <= self.t_pulse:
            raise DomainError(
                f"t_sample={self.t_sample} must be in (0, t_pulse={self.t_pulse}]"
            )

    @property
    def max_code(self) -> int:
        return 2 ** self.n_bits - 1

    @property
    def max_product(self) -> int:
        return self.max_code * self.max_code


def with_v_bulk(cfg: ArrayConfig, v_bulk: float) -> ArrayConfig:
    """Same array at a different access-device bulk bias.

    The DAC floor, pulse width and sample instant are re-derived for the
    new bias.
    """
    return ArrayConfig(
        cell=replace(cfg.cell, v_bulk=v_bulk),
        n_bits=cfg.n_bits,
        scheme=cfg.scheme,
        c_unit=cfg.c_unit,
        dt_divisor=cfg.dt_divisor,
    )


@dataclass(frozen=True)
class MacResult:
    """Outcome of one analog multiply."""

    a: int
    b: int
    v_wl: float
    v_bit: tuple[float, ...]              # sampled per-bit voltages, MSB first
    regions: tuple[OperatingRegion, ...]  # access-device region at the sample
    v_combined: float
    code: int
    exact: int
    correct: bool
    sampling_valid: bool  # no active cell had fallen into triode at the sample


@dataclass(frozen=True)
class LevelTable:
    """Nominal readout levels, one voltage per product value, decreasing."""

    products: np.ndarray
    voltages: np.ndarray

    def voltage(self, product: int) -> float:
        idx = int(np.searchsorted(self.products, product))
        if idx >= len(self.products) or self.products[idx] != product:
            raise RangeError(f"product {product} not in level table")
        return float(self.voltages[idx])


def store_operand(a: int, n_bits: int) -> list[int]:
    """Bit decomposition of the stored operand, MSB first."""
    if n_bits < 1:
        raise RangeError(f"n_bits must be >= 1, got {n_bits}")
    if not 0 <= a <= 2 ** n_bits - 1:
        raise RangeError(f"operand must be in [0, {2 ** n_bits - 1}], got {a}")
    return [(a >> (n_bits - 1 - i)) & 1 for i in range(n_bits)]


def combine_bits(v_bit, n_bits: int) -> float:
    """Binary-weighted charge share of per-bit voltages (MSB first)."""
    weights = np.array([1 << (n_bits - 1 - i) for i in range(n_bits)], dtype=float)
    return float(np.dot(weights, np.asarray(v_bit, dtype=float)) / weights.sum())


def _sample_rows(cfg: ArrayConfig) -> tuple[int, list[int], float]:
    """Time grid rows bracketing the sample instant plus interpolation weight."""
    n_steps = cfg.dt_divisor
    dt = cfg.t_pulse / n_steps
    pos = cfg.t_sample / dt
    k0 = min(int(pos), n_steps - 1)
    if pos == float(k0):
        return n_steps, [k0], 0.0
    return n_steps, [k0, k0 + 1], pos - k0


def _simulate_bits(cfg: ArrayConfig, bits: list[int], v_wl: float,
                   devices: list[tuple[DeviceParams, DeviceParams]] | None = None):
    """Sampled per-bit voltages and regions; inactive bits stay at vdd."""
    n = cfg.n_bits
    vdd = cfg.cell.vdd
    active = [i for i, bit in enumerate(bits) if bit == 1]
    v_bit = [vdd] * n
    regions = [OperatingRegion.CUTOFF] * n
    valid = True
    if active:
        cell = replace(cfg.cell, stored_bit=1)
        if devices is None:
            # nominal run: all active cells identical, integrate one
            batch = CellBatch.from_cells(cell)
            sel = [0] * len(active)
        else:
            batch = CellBatch.from_cells(cell, [devices[i] for i in active])
            sel = list(range(len(active)))
        n_steps, rows, frac = _sample_rows(cfg)
        _, v, _, reg = integrate_batch(batch, v_wl, cfg.t_pulse, n_steps, np.array(rows))
        if len(rows) == 1:
            v_s = v[0]
            triode = reg[0] == 2
        else:
            v_s = v[0] + (v[1] - v[0]) * frac
            triode = (reg[0] == 2) | (reg[1] == 2)
        for pos, i in enumerate(active):
            v_bit[i] = float(v_s[sel[pos]])
            regions[i] = _REGION_BY_CODE[int(reg[0][sel[pos]])]
            if triode[sel[pos]]:
                valid = False
    return v_bit, regions, valid


def run_mac(cfg: ArrayConfig, a: int, b: int,
            levels: LevelTable | None = None,
            devices: list[tuple[DeviceParams, DeviceParams]] | None = None
            ) -> MacResult:
    """One analog multiply a * b.

    ``levels`` may be passed to reuse a precomputed nominal table;
    ``devices`` overrides the per-bit (access, pull-down) parameter
    pairs, which is how process variation enters.
    """
    bits = store_operand(a, cfg.n_bits)
    if not 0 <= b <= cfg.max_code:
        raise RangeError(f"operand must be in [0, {cfg.max_code}], got {b}")
    if levels is None:
        levels = nominal_levels(cfg)
    v_wl = code_to_vwl(cfg.dac, b)
    v_bit, regions, valid = _simulate_bits(cfg, bits, v_wl, devices)
    v_combined = combine_bits(v_bit, cfg.n_bits)
    code = quantize(v_combined, levels)
    exact = a * b
    return MacResult(
        a=a,
        b=b,
        v_wl=v_wl,
        v_bit=tuple(v_bit),
        regions=tuple(regions),
        v_combined=v_combined,
        code=code,
        exact=exact,
        correct=code == exact,
        sampling_valid=valid,
    )


def nominal_levels(cfg: ArrayConfig) -> LevelTable:
    """Readout level per product value under nominal parameters.

    The table is a uniform ladder from vdd (product 0) down to the
    simulated full-scale combined voltage at max_code * max_code, one
    level per integer product.  In the linear-discharge regime (sqrt
    scheme, saturated square law) this coincides exactly with simulating
    each product individually; outside it, per-product simulation is not
    even well defined because the combined voltage depends on the
    operand split, not just the product.  Anchoring the ladder at the
    simulated full scale keeps the quantizer strictly monotone and
    consistent with the analog path for every configuration.
    """
    vdd = cfg.cell.vdd
    bits = store_operand(cfg.max_code, cfg.n_bits)
    v_wl = code_to_vwl(cfg.dac, cfg.max_code)
    v_bit, _, _ = _simulate_bits(cfg, bits, v_wl)
    v_fs = combine_bits(v_bit, cfg.n_bits)
    pmax = cfg.max_product
    spacing = (vdd - v_fs) / pmax
    if spacing < DEGENERATE_SPACING:
        raise DegenerateError(
            f"level spacing {spacing:.3e} V below {DEGENERATE_SPACING} V; "
            "t_sample is likely too small for a resolvable discharge"
        )
    products = np.arange(pmax + 1)
    return LevelTable(products=products, voltages=vdd - spacing * products)


def quantize(v: float, levels: LevelTable) -> int:
    """Nearest readout level; ties resolve toward the smaller product.

    Voltages above the top level clamp to product 0, below the bottom
    level to the maximum product.
    """
    return int(levels.products[np.argmin(np.abs(levels.voltages - v))])


def exhaustive_mac(cfg: ArrayConfig) -> list[MacResult]:
    """Every operand pair at the configured width, sharing one level table."""
    levels = nominal_levels(cfg)
    return [
        run_mac(cfg, a, b, levels=levels)
        for a in range(cfg.max_code + 1)
        for b in range(cfg.max_code + 1)
    ]
