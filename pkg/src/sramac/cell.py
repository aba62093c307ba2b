"""Bit-line-bar discharge dynamics of a single 6T bitcell.

With a logic 1 stored, the pre-charged bit-line-bar capacitance
discharges through the access transistor in series with the pull-down
of the cell inverter.  Charge balance on the line gives

    c_blb * dv_blb/dt = -i_d(v_blb)

which is integrated with classical fixed-step RK4.  Two pull-down
treatments are available:

* ``IDEAL_GROUND`` - the pull-down is a perfect short; the access
  source sits at 0 V.  While the access device stays saturated (and
  lambda = 0) the discharge is linear in time and has the closed-form
  solution :func:`closed_form_vblb`.
* ``SERIES_TRIODE`` - the pull-down conducts in triode with a nonzero
  drain-source drop; the internal node voltage is solved at every
  evaluation by bisection on the current balance between the two
  devices.  The lifted source raises the access device's effective
  threshold (vsb = v_x - v_bulk) and slows the discharge.

The pre-charge is ideal and instantaneous to vdd, the word line is an
ideal rectangular pulse, and the stored-0 leakage path is not modeled.

All transient work (single cells, arrays, Monte-Carlo trials) runs
through one compiled batch integrator; elements are independent, so
results do not depend on how a batch is split or threaded.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, NamedTuple

import numpy as np
from numba import njit, prange

from .device import (
    BiasPoint,
    DeviceParams,
    OperatingRegion,
    drain_current,
    effective_vth,
    ids_kernel,
    vth_kernel,
)
from .errors import ConvergenceError, DomainError, RangeError

VDD_DEFAULT = 1.0
C_BLB_DEFAULT = 50e-15     # F, typical short bit line
DT_DIVISOR_DEFAULT = 2000  # default dt = t_pulse / 2000
VX_REL_TOL = 1e-9          # internal-node bisection tolerance
VX_MAX_ITER = 200

_REGION_BY_CODE = (
    OperatingRegion.CUTOFF,
    OperatingRegion.SATURATION,
    OperatingRegion.TRIODE,
)


class M3Mode(Enum):
    IDEAL_GROUND = "ideal_ground"
    SERIES_TRIODE = "series_triode"


@dataclass(frozen=True)
class BitcellConfig:
    """Discharge-relevant state of one 6T cell."""

    vdd: float = VDD_DEFAULT
    c_blb: float = C_BLB_DEFAULT
    m2acc: DeviceParams = field(default_factory=DeviceParams)
    m3: DeviceParams = field(default_factory=DeviceParams)
    v_bulk: float = 0.0     # bulk bias on the access device
    stored_bit: int = 1
    m3_mode: M3Mode = M3Mode.SERIES_TRIODE

    def __post_init__(self):
        if not self.vdd > 0:
            raise DomainError(f"vdd must be > 0, got {self.vdd}")
        if not self.c_blb > 0:
            raise DomainError(f"c_blb must be > 0, got {self.c_blb}")
        if not 0.0 <= self.v_bulk <= self.vdd:
            raise DomainError(
                f"v_bulk must be in [0, vdd={self.vdd}], got {self.v_bulk}"
            )
        # Worst-case vsb during operation is -v_bulk (source at ground).
        if self.m2acc.phi2f - self.v_bulk <= 0.0:
            raise DomainError(
                f"v_bulk={self.v_bulk} exceeds the bulk-diode limit "
                f"phi2f={self.m2acc.phi2f} of the access device"
            )
        if self.stored_bit not in (0, 1):
            raise DomainError(f"stored_bit must be 0 or 1, got {self.stored_bit}")

    def vth_access(self) -> float:
        """Effective threshold of the access device at the configured bulk bias."""
        return effective_vth(self.m2acc, -self.v_bulk)


@dataclass(frozen=True)
class DischargeTrace:
    """Time series of the bit-line-bar voltage with region annotations."""

    times: np.ndarray
    v_blb: np.ndarray
    v_internal: np.ndarray              # access-device source node
    regions: tuple[OperatingRegion, ...]  # access-device region per sample

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.v_blb) == len(self.v_internal) == len(self.regions) == n):
            raise ValueError("trace arrays must have equal length")

    def to_csv(self, out: IO[str]) -> None:
        """Write the trace as CSV with columns t_s, v_blb_V, v_x_V, region."""
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["t_s", "v_blb_V", "v_x_V", "region"])
        for t, v, vx, reg in zip(self.times, self.v_blb, self.v_internal, self.regions):
            writer.writerow([repr(float(t)), repr(float(v)), repr(float(vx)), reg.value])


class ClosedFormPoint(NamedTuple):
    v_blb: float
    clamped: bool  # True once the saturation exit level was reached


class SamplePoint(NamedTuple):
    v_blb: float
    saturated: bool  # access device in saturation at the sample instant


def closed_form_vblb(cfg: BitcellConfig, v_wl: float, t: float) -> ClosedFormPoint:
    """Saturation-regime closed form of the discharge (ideal-ground pull-down).

    v_blb(t) = vdd - kp*(W/L)*(v_wl - vth)^2 * t / (2*c_blb), clamped
    below at the saturation exit level v_wl - vth.  Valid for lambda = 0
    while the access device stays saturated.
    """
    if cfg.stored_bit != 1:
        raise DomainError(
            "closed form requires stored_bit = 1; branch on the stored bit "
            "explicitly instead of expecting a flat vdd return"
        )
    vth = cfg.vth_access()
    if v_wl <= vth:
        raise DomainError(
            f"v_wl={v_wl} must exceed the effective threshold {vth}: no discharge"
        )
    od = v_wl - vth
    dev = cfg.m2acc
    v = cfg.vdd - dev.kp * dev.wl * od * od * t / (2.0 * cfg.c_blb)
    exit_level = od
    if v < exit_level:
        return ClosedFormPoint(exit_level, True)
    return ClosedFormPoint(v, False)


def wl_pulse_width_max(cfg: BitcellConfig, v_wl: float) -> float:
    """Longest word-line pulse keeping the access device saturated.

    Time for v_blb to fall from vdd to the saturation exit level
    v_wl - vth at the constant saturation current i0 evaluated at
    vds = vdd (lambda per config).  Returns +inf in the zero-overdrive
    limit.
    """
    if cfg.stored_bit != 1:
        raise DomainError("pulse-width bound requires stored_bit = 1")
    vth = cfg.vth_access()
    if v_wl <= vth:
        raise DomainError(
            f"v_wl={v_wl} must exceed the effective threshold {vth}"
        )
    i0 = drain_current(cfg.m2acc, BiasPoint(vgs=v_wl, vds=cfg.vdd, vsb=-cfg.v_bulk))
    if i0 == 0.0:
        return float("inf")
    return cfg.c_blb * (cfg.vdd + vth - v_wl) / i0


# --- batched transient engine -------------------------------------------


@dataclass
class CellBatch:
    """Stacked per-cell device parameters for one integration run."""

    vdd: float
    c_blb: float
    v_bulk: float
    mode: M3Mode
    acc_vth0: np.ndarray
    acc_gamma: np.ndarray
    acc_phi2f: np.ndarray
    acc_kpwl: np.ndarray
    acc_lambda: np.ndarray
    m3_vth0: np.ndarray
    m3_kpwl: np.ndarray
    m3_lambda: np.ndarray

    @classmethod
    def from_cells(cls, cfg: BitcellConfig,
                   devices: list[tuple[DeviceParams, DeviceParams]] | None = None
                   ) -> "CellBatch":
        """Batch from (m2acc, m3) pairs; defaults to one nominal cell."""
        if devices is None:
            devices = [(cfg.m2acc, cfg.m3)]
        acc = [d[0] for d in devices]
        m3 = [d[1] for d in devices]
        return cls(
            vdd=cfg.vdd,
            c_blb=cfg.c_blb,
            v_bulk=cfg.v_bulk,
            mode=cfg.m3_mode,
            acc_vth0=np.array([d.vth0 for d in acc]),
            acc_gamma=np.array([d.gamma for d in acc]),
            acc_phi2f=np.array([d.phi2f for d in acc]),
            acc_kpwl=np.array([d.kp * d.wl for d in acc]),
            acc_lambda=np.array([d.lambda_ for d in acc]),
            m3_vth0=np.array([d.vth0 for d in m3]),
            m3_kpwl=np.array([d.kp * d.wl for d in m3]),
            m3_lambda=np.array([d.lambda_ for d in m3]),
        )

    @property
    def size(self) -> int:
        return self.acc_vth0.shape[0]


@njit(cache=True)
def _solve_vx(v_blb, vdd, v_wl, v_bulk, vth_floor, tol,
              vth0, gamma, phi2f, kpwl, lam,
              vth03, kpwl3, lam3):
    """Internal node voltage balancing access and pull-down currents.

    The pull-down gate sits at the stored-high node (vdd).  The balance
    i_acc(x) - i_m3(x) is strictly decreasing in x, nonnegative at x = 0
    and nonpositive at the bracket top, so bisection always converges;
    NaN signals iteration exhaustion.
    """
    if v_blb <= 0.0:
        return 0.0
    hi = v_blb
    top = v_wl - vth_floor  # access device cut off above this lift
    if top < hi:
        hi = top
    if hi <= 0.0:
        return 0.0
    i0 = ids_kernel(kpwl, vth_kernel(vth0, gamma, phi2f, -v_bulk),
                    lam, v_wl, v_blb)
    if i0 <= 0.0:
        return 0.0
    lo = 0.0
    for _ in range(VX_MAX_ITER):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        vth = vth_kernel(vth0, gamma, phi2f, mid - v_bulk)
        i_acc = ids_kernel(kpwl, vth, lam, v_wl - mid, v_blb - mid)
        i_m3 = ids_kernel(kpwl3, vth03, lam3, vdd, mid)
        if i_acc > i_m3:
            lo = mid
        else:
            hi = mid
    return np.nan


@njit(cache=True)
def _cell_current(v, vdd, v_wl, v_bulk, series, vth_floor, tol,
                  vth0, gamma, phi2f, kpwl, lam,
                  vth03, kpwl3, lam3):
    """Discharge current and internal node voltage at line voltage ``v``."""
    if series:
        vx = _solve_vx(v, vdd, v_wl, v_bulk, vth_floor, tol,
                       vth0, gamma, phi2f, kpwl, lam, vth03, kpwl3, lam3)
    else:
        vx = 0.0
    vth = vth_kernel(vth0, gamma, phi2f, vx - v_bulk)
    i = ids_kernel(kpwl, vth, lam, v_wl - vx, v - vx)
    return i, vx, vth


@njit(cache=True, parallel=True)
def _rk4_kernel(vdd, c_blb, v_bulk, series, v_wl, dt, n_steps, rec_rows,
                acc_vth0, acc_gamma, acc_phi2f, acc_kpwl, acc_lam,
                m3_vth0, m3_kpwl, m3_lam):
    m = acc_vth0.shape[0]
    n_rec = rec_rows.shape[0]
    v_out = np.empty((n_rec, m))
    vx_out = np.empty((n_rec, m))
    reg_out = np.empty((n_rec, m), dtype=np.uint8)
    tol = VX_REL_TOL * max(1.0, vdd)
    for e in prange(m):
        vth0 = acc_vth0[e]
        gamma = acc_gamma[e]
        phi2f = acc_phi2f[e]
        kpwl = acc_kpwl[e]
        lam = acc_lam[e]
        vth03 = m3_vth0[e]
        kpwl3 = m3_kpwl[e]
        lam3 = m3_lam[e]
        vth_floor = vth_kernel(vth0, gamma, phi2f, -v_bulk)
        v = vdd
        ri = 0
        for k in range(n_steps + 1):
            if ri < n_rec and rec_rows[ri] == k:
                i, vx, vth = _cell_current(
                    v, vdd, v_wl, v_bulk, series, vth_floor, tol,
                    vth0, gamma, phi2f, kpwl, lam, vth03, kpwl3, lam3)
                od = (v_wl - vx) - vth
                if od <= 0.0:
                    reg = 0
                elif v - vx >= od:
                    reg = 1
                else:
                    reg = 2
                v_out[ri, e] = v
                vx_out[ri, e] = vx
                reg_out[ri, e] = reg
                ri += 1
            if k == n_steps:
                break
            i1, _, _ = _cell_current(v, vdd, v_wl, v_bulk, series, vth_floor,
                                     tol, vth0, gamma, phi2f, kpwl, lam,
                                     vth03, kpwl3, lam3)
            k1 = -i1 / c_blb
            i2, _, _ = _cell_current(v + 0.5 * dt * k1, vdd, v_wl, v_bulk,
                                     series, vth_floor, tol, vth0, gamma,
                                     phi2f, kpwl, lam, vth03, kpwl3, lam3)
            k2 = -i2 / c_blb
            i3, _, _ = _cell_current(v + 0.5 * dt * k2, vdd, v_wl, v_bulk,
                                     series, vth_floor, tol, vth0, gamma,
                                     phi2f, kpwl, lam, vth03, kpwl3, lam3)
            k3 = -i3 / c_blb
            i4, _, _ = _cell_current(v + dt * k3, vdd, v_wl, v_bulk,
                                     series, vth_floor, tol, vth0, gamma,
                                     phi2f, kpwl, lam, vth03, kpwl3, lam3)
            k4 = -i4 / c_blb
            v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return v_out, vx_out, reg_out


def integrate_batch(batch: CellBatch, v_wl: float, t_pulse: float,
                    n_steps: int, record_rows: np.ndarray | None = None):
    """RK4-integrate the discharge for every cell in the batch.

    Returns (times, v_blb, v_x, region_codes) sampled at ``record_rows``
    (all n_steps + 1 grid rows when None; duplicates are dropped).
    Region codes: 0 cutoff, 1 saturation, 2 triode.
    """
    if record_rows is None:
        record_rows = np.arange(n_steps + 1)
    rows = np.unique(np.asarray(record_rows, dtype=np.int64))
    if rows.size and (rows[0] < 0 or rows[-1] > n_steps):
        raise RangeError(f"record_rows must lie in [0, {n_steps}]")
    dt = t_pulse / n_steps if n_steps > 0 else 0.0
    v, vx, reg = _rk4_kernel(
        float(batch.vdd), float(batch.c_blb), float(batch.v_bulk),
        batch.mode is M3Mode.SERIES_TRIODE, float(v_wl), dt, n_steps, rows,
        batch.acc_vth0, batch.acc_gamma, batch.acc_phi2f, batch.acc_kpwl,
        batch.acc_lambda, batch.m3_vth0, batch.m3_kpwl, batch.m3_lambda,
    )
    if np.any(np.isnan(v)) or np.any(np.isnan(vx)):
        raise ConvergenceError(
            f"internal-node bisection did not converge in {VX_MAX_ITER} iterations"
        )
    return rows * dt, v, vx, reg


def simulate_discharge(cfg: BitcellConfig, v_wl: float, t_pulse: float,
                       dt: float | None = None) -> DischargeTrace:
    """Transient discharge of one cell over a rectangular word-line pulse.

    ``dt`` defaults to t_pulse / 2000 and must satisfy the resolution
    floor dt <= t_pulse / 100.  A stored 0 yields a flat trace at vdd
    (no discharge path; the access source node sits at the high internal
    node).
    """
    if t_pulse < 0:
        raise RangeError(f"t_pulse must be >= 0, got {t_pulse}")
    if dt is None:
        dt = t_pulse / DT_DIVISOR_DEFAULT
    if t_pulse > 0:
        if not dt > 0:
            raise RangeError(f"dt must be > 0, got {dt}")
        if dt > t_pulse / 100.0:
            raise RangeError(
                f"dt={dt} exceeds the resolution floor t_pulse/100={t_pulse / 100.0}"
            )
        n_steps = max(100, int(round(t_pulse / dt)))
    else:
        n_steps = 0

    times = np.linspace(0.0, t_pulse, n_steps + 1)
    if cfg.stored_bit == 0:
        flat = np.full(n_steps + 1, cfg.vdd)
        return DischargeTrace(
            times=times,
            v_blb=flat,
            v_internal=flat.copy(),
            regions=(OperatingRegion.CUTOFF,) * (n_steps + 1),
        )

    batch = CellBatch.from_cells(cfg)
    _, v, vx, reg = integrate_batch(batch, v_wl, t_pulse, n_steps)
    return DischargeTrace(
        times=times,
        v_blb=v[:, 0],
        v_internal=vx[:, 0],
        regions=tuple(_REGION_BY_CODE[int(c)] for c in reg[:, 0]),
    )


def sample_vblb(trace: DischargeTrace, t_sample: float) -> SamplePoint:
    """Linear interpolation of the trace at ``t_sample``.

    The saturated flag requires the access device to be in saturation at
    the bracketing samples (at the exact sample for on-grid times).
    """
    times = trace.times
    if t_sample < times[0] or t_sample > times[-1]:
        raise RangeError(
            f"t_sample={t_sample} outside trace range [{times[0]}, {times[-1]}]"
        )
    idx = int(np.searchsorted(times, t_sample))
    if idx < len(times) and times[idx] == t_sample:
        return SamplePoint(
            float(trace.v_blb[idx]),
            trace.regions[idx] is OperatingRegion.SATURATION,
        )
    i0, i1 = idx - 1, idx
    t0, t1 = times[i0], times[i1]
    frac = (t_sample - t0) / (t1 - t0)
    v = float(trace.v_blb[i0] + (trace.v_blb[i1] - trace.v_blb[i0]) * frac)
    saturated = (
        trace.regions[i0] is OperatingRegion.SATURATION
        and trace.regions[i1] is OperatingRegion.SATURATION
    )
    return SamplePoint(v, saturated)
