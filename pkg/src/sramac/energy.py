"""Pre-charge restore energy per multiply.

Each combination capacitor C_i = 2^i * c_unit is recharged from the
supply after the operation, costing C_i * vdd * (vdd - v_bit_i).  DAC,
word-line driver and readout energy are not modeled, so the figure is a
lower bound on the hardware's energy per computation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mac_array import ArrayConfig, MacResult


@dataclass(frozen=True)
class EnergyReport:
    e_discharge: float          # J, supply energy restoring the bit lines
    e_total: float              # J
    per_bit: tuple[float, ...]  # J, MSB first


def mac_energy(cfg: ArrayConfig, result: MacResult) -> EnergyReport:
    """Restore energy for one MacResult; undischarged bits cost nothing."""
    vdd = cfg.cell.vdd
    n = cfg.n_bits
    per_bit = tuple(
        (1 << (n - 1 - i)) * cfg.c_unit * vdd * (vdd - result.v_bit[i])
        for i in range(n)
    )
    total = sum(per_bit)
    return EnergyReport(e_discharge=total, e_total=total, per_bit=per_bit)
