import numpy as np

from sramac import BitcellConfig, DeviceParams, M3Mode


def random_ideal_cell(rng: np.random.Generator, lam: float = 0.0):
    """Randomized single-cell config in the closed-form regime.

    Ideal-ground pull-down; lambda configurable.  Returns (cell, v_wl)
    with v_wl safely above the effective threshold.
    """
    dev = DeviceParams(
        vth0=rng.uniform(0.30, 0.50),
        gamma=rng.uniform(0.15, 0.40),
        phi2f=rng.uniform(0.70, 0.90),
        kp=rng.uniform(1e-4, 3e-4),
        w=rng.uniform(1e-7, 3e-7),
        l=1e-7,
        lambda_=lam,
    )
    cell = BitcellConfig(
        vdd=rng.uniform(0.9, 1.2),
        c_blb=rng.uniform(2e-14, 8e-14),
        m2acc=dev,
        v_bulk=float(rng.choice([0.0, 0.3, 0.6])),
        stored_bit=1,
        m3_mode=M3Mode.IDEAL_GROUND,
    )
    vth = cell.vth_access()
    v_wl = rng.uniform(vth + 0.1, max(vth + 0.15, cell.vdd))
    return cell, v_wl
