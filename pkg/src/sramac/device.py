"""Region-aware square-law NMOS model with body-effect threshold shift.

Every drain-current evaluation in the simulator funnels through this
module.  The model is the classic long-channel square law: zero current
below threshold, quadratic saturation current, textbook triode expression
below the overdrive, and an optional (1 + lambda*Vds) channel-length
modulation factor.  The factor is applied in the triode region as well so
the I-V curve stays continuous at the region boundary.

The threshold follows the bulk terminal:

    vth(vsb) = vth0 + gamma * (sqrt(phi2f + vsb) - sqrt(phi2f))

Negative ``vsb`` (bulk above source, forward body bias) lowers the
threshold; the valid domain ends at the bulk-diode limit phi2f + vsb <= 0.

Bias arguments accept floats or numpy arrays (elementwise broadcast);
float inputs return plain floats.  Sub-threshold conduction is modeled as
exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .errors import DomainError

# Defaults target a generic 65 nm access device.  The body-effect
# coefficient is calibrated so a 0.6 V forward bulk bias lowers the
# threshold by exactly 125 mV at phi2f = 0.8 V.
VTH0_DEFAULT = 0.45           # V
PHI2F_DEFAULT = 0.8           # V
FORWARD_BIAS_REF = 0.6        # V
VTH_DROP_REF = 0.125          # V
GAMMA_DEFAULT = VTH_DROP_REF / (
    PHI2F_DEFAULT ** 0.5 - (PHI2F_DEFAULT - FORWARD_BIAS_REF) ** 0.5
)                             # sqrt(V), ~0.2795
KP_DEFAULT = 200e-6           # A/V^2
W_DEFAULT = 200e-9            # m
L_DEFAULT = 100e-9            # m


class OperatingRegion(Enum):
    CUTOFF = "cutoff"
    SATURATION = "saturation"
    TRIODE = "triode"


@dataclass(frozen=True)
class DeviceParams:
    """Physical parameters of one NMOS transistor."""

    vth0: float = VTH0_DEFAULT    # zero-bias threshold [V]
    gamma: float = GAMMA_DEFAULT  # body-effect coefficient [sqrt(V)]
    phi2f: float = PHI2F_DEFAULT  # surface potential term 2*phi_F [V]
    kp: float = KP_DEFAULT        # process transconductance mu_n*Cox [A/V^2]
    w: float = W_DEFAULT          # gate width [m]
    l: float = L_DEFAULT          # gate length [m]
    lambda_: float = 0.0          # channel-length modulation [1/V]

    def __post_init__(self):
        if not self.vth0 > 0:
            raise DomainError(f"vth0 must be > 0, got {self.vth0}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if not self.phi2f > 0:
            raise DomainError(f"phi2f must be > 0, got {self.phi2f}")
        if not self.kp > 0:
            raise DomainError(f"kp must be > 0, got {self.kp}")
        if not self.w > 0:
            raise DomainError(f"w must be > 0, got {self.w}")
        if not self.l > 0:
            raise DomainError(f"l must be > 0, got {self.l}")
        if self.lambda_ < 0:
            raise DomainError(f"lambda_ must be >= 0, got {self.lambda_}")

    @property
    def wl(self) -> float:
        """Aspect ratio W/L."""
        return self.w / self.l


@dataclass(frozen=True)
class BiasPoint:
    """Terminal voltages of an NMOS in normal (vds >= 0) orientation."""

    vgs: float
    vds: float
    vsb: float = 0.0  # source-to-bulk; negative = forward body bias

    def __post_init__(self):
        if self.vds < 0:
            raise DomainError(f"vds must be >= 0, got {self.vds}")


def effective_vth(p: DeviceParams, vsb):
    """Threshold voltage at source-to-bulk voltage ``vsb``.

    Strictly increasing in ``vsb``; forward bias (vsb < 0) lowers it.
    Raises DomainError once the bulk-diode limit phi2f + vsb <= 0 is hit.
    """
    scalar = np.isscalar(vsb)
    arg = p.phi2f + np.asarray(vsb, dtype=float)
    if np.any(arg <= 0.0):
        raise DomainError(
            f"phi2f + vsb must stay > 0 (phi2f={p.phi2f}, vsb={vsb}): "
            "bulk diode forward-bias limit exceeded"
        )
    vth = p.vth0 + p.gamma * (np.sqrt(arg) - np.sqrt(p.phi2f))
    return float(vth) if scalar else vth


def region(p: DeviceParams, bias: BiasPoint) -> OperatingRegion:
    """Operating region at the given bias point."""
    vth = effective_vth(p, bias.vsb)
    if bias.vgs <= vth:
        return OperatingRegion.CUTOFF
    if bias.vds >= bias.vgs - vth:
        return OperatingRegion.SATURATION
    return OperatingRegion.TRIODE


# Compiled scalar kernels.  They hold the model algebra once; the
# Python-facing functions below and the batched transient integrator in
# ``cell`` both call them.  The square-root argument is clamped at zero
# here, so callers are responsible for the bulk-diode domain check.

@njit(cache=True)
def vth_kernel(vth0, gamma, phi2f, vsb):
    arg = phi2f + vsb
    if arg < 0.0:
        arg = 0.0
    return vth0 + gamma * (np.sqrt(arg) - np.sqrt(phi2f))


@njit(cache=True)
def ids_kernel(kp_wl, vth, lambda_, vgs, vds):
    # Triode integral evaluated up to vde = clip(vds, 0, overdrive),
    # which reproduces cutoff (vde = 0), triode (vde = vds) and
    # saturation (vde = overdrive) in one expression; negative vds
    # yields zero current (discharge stops at equilibrium).
    od = vgs - vth
    if od <= 0.0 or vds <= 0.0:
        return 0.0
    vde = vds if vds < od else od
    i = kp_wl * (od * vde - 0.5 * vde * vde)
    if lambda_ != 0.0:
        i *= 1.0 + lambda_ * vds
    return i


def drain_current(p: DeviceParams, bias: BiasPoint) -> float:
    """Drain current [A] from the square law; zero in cutoff."""
    vth = effective_vth(p, bias.vsb)
    return float(ids_kernel(p.kp * p.wl, vth, p.lambda_, bias.vgs, bias.vds))
