"""Square-law device model: threshold shift, regions, current properties."""

import numpy as np
import pytest

from sramac import (
    BiasPoint,
    DeviceParams,
    DomainError,
    OperatingRegion,
    drain_current,
    effective_vth,
    region,
)


def test_zero_bias_threshold_identity():
    p = DeviceParams(vth0=0.45, gamma=0.2795, phi2f=0.8)
    assert effective_vth(p, 0.0) == 0.45


def test_default_calibration_125mv_drop():
    p = DeviceParams()
    drop = effective_vth(p, 0.0) - effective_vth(p, -0.6)
    assert drop == pytest.approx(0.125, abs=1e-12)


def test_bulk_diode_limit_raises():
    p = DeviceParams(vth0=0.45, gamma=0.2795, phi2f=0.8)
    with pytest.raises(DomainError):
        effective_vth(p, -0.81)
    with pytest.raises(DomainError):
        effective_vth(p, -0.8)  # boundary is excluded
    effective_vth(p, -0.79)  # just inside is fine


def test_threshold_monotone_in_vsb():
    p = DeviceParams()
    vsbs = np.linspace(-0.7, 1.0, 40)
    vths = effective_vth(p, vsbs)
    assert np.all(np.diff(vths) > 0)


def test_reverse_bias_raises_threshold():
    p = DeviceParams()
    assert effective_vth(p, 0.5) > p.vth0


class TestRegion:
    def test_cutoff_below_threshold(self):
        p = DeviceParams(vth0=0.45, gamma=0.0)
        assert region(p, BiasPoint(vgs=0.3, vds=0.5)) is OperatingRegion.CUTOFF

    def test_saturation_above_overdrive(self):
        p = DeviceParams(vth0=0.35, gamma=0.0)
        assert region(p, BiasPoint(vgs=0.7, vds=1.0)) is OperatingRegion.SATURATION

    def test_triode_below_overdrive(self):
        p = DeviceParams(vth0=0.35, gamma=0.0)
        assert region(p, BiasPoint(vgs=0.7, vds=0.1)) is OperatingRegion.TRIODE

    def test_boundary_counts_as_saturation(self):
        p = DeviceParams(vth0=0.35, gamma=0.0)
        assert region(p, BiasPoint(vgs=0.7, vds=0.35)) is OperatingRegion.SATURATION


class TestDrainCurrent:
    def test_cutoff_is_exactly_zero(self):
        p = DeviceParams(vth0=0.45, gamma=0.0)
        assert drain_current(p, BiasPoint(vgs=0.3, vds=1.0)) == 0.0

    def test_saturation_hand_value(self):
        # (kp/2)(W/L)(vgs - vth)^2 = (200u/2)*2*0.09 = 18 uA
        p = DeviceParams(vth0=0.40, gamma=0.0, kp=200e-6, w=200e-9, l=100e-9)
        i = drain_current(p, BiasPoint(vgs=0.70, vds=1.0))
        assert i == pytest.approx(18e-6, rel=1e-12)

    def test_triode_hand_value(self):
        # kp(W/L)[(vgs-vth)vds - vds^2/2]
        p = DeviceParams(vth0=0.40, gamma=0.0, kp=200e-6, w=200e-9, l=100e-9)
        i = drain_current(p, BiasPoint(vgs=0.70, vds=0.1))
        assert i == pytest.approx(400e-6 * (0.3 * 0.1 - 0.005), rel=1e-12)

    def test_lambda_factor_in_saturation(self):
        p0 = DeviceParams(vth0=0.40, gamma=0.0)
        p1 = DeviceParams(vth0=0.40, gamma=0.0, lambda_=0.1)
        bias = BiasPoint(vgs=0.7, vds=1.0)
        assert drain_current(p1, bias) == pytest.approx(
            drain_current(p0, bias) * 1.1, rel=1e-12
        )

    def test_continuity_at_region_boundary(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            p = DeviceParams(
                vth0=rng.uniform(0.3, 0.5),
                gamma=rng.uniform(0.0, 0.4),
                phi2f=rng.uniform(0.7, 0.9),
                kp=rng.uniform(1e-4, 3e-4),
                w=rng.uniform(1e-7, 3e-7),
                l=1e-7,
                lambda_=float(rng.choice([0.0, 0.05, 0.2])),
            )
            vsb = rng.uniform(-0.3, 0.3)
            vth = effective_vth(p, vsb)
            vgs = vth + rng.uniform(0.1, 0.4)
            od = vgs - vth
            at = drain_current(p, BiasPoint(vgs=vgs, vds=od, vsb=vsb))
            # hand-evaluated saturation expression at the boundary point
            expected = 0.5 * p.kp * p.wl * od * od * (1.0 + p.lambda_ * od)
            assert at == pytest.approx(expected, rel=1e-12)
            below = drain_current(p, BiasPoint(vgs=vgs, vds=od * (1 - 1e-9), vsb=vsb))
            above = drain_current(p, BiasPoint(vgs=vgs, vds=od * (1 + 1e-9), vsb=vsb))
            assert below == pytest.approx(at, rel=1e-6)
            assert above == pytest.approx(at, rel=1e-6)

    def test_monotone_in_vgs(self):
        p = DeviceParams(lambda_=0.1)
        for vds in (0.05, 0.2, 1.0):
            currents = [
                drain_current(p, BiasPoint(vgs=v, vds=vds))
                for v in np.linspace(0.0, 1.2, 60)
            ]
            assert all(b >= a for a, b in zip(currents, currents[1:]))

    def test_nonnegative_for_valid_bias(self):
        rng = np.random.default_rng(3)
        p = DeviceParams(lambda_=0.1)
        for _ in range(200):
            bias = BiasPoint(
                vgs=rng.uniform(-0.5, 1.5),
                vds=rng.uniform(0.0, 1.5),
                vsb=rng.uniform(-0.6, 0.6),
            )
            assert drain_current(p, bias) >= 0.0

    def test_forward_body_bias_increases_saturation_current(self):
        p = DeviceParams()
        for vgs in np.linspace(effective_vth(p, 0.0) + 0.05, 1.0, 10):
            base = drain_current(p, BiasPoint(vgs=vgs, vds=1.0, vsb=0.0))
            boosted = drain_current(p, BiasPoint(vgs=vgs, vds=1.0, vsb=-0.6))
            assert boosted > base


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"vth0": 0.0},
            {"vth0": -0.1},
            {"gamma": -0.01},
            {"phi2f": 0.0},
            {"kp": 0.0},
            {"w": 0.0},
            {"l": -1e-9},
            {"lambda_": -0.1},
        ],
    )
    def test_invalid_params_raise(self, kwargs):
        with pytest.raises(DomainError):
            DeviceParams(**kwargs)

    def test_negative_vds_rejected(self):
        with pytest.raises(DomainError):
            BiasPoint(vgs=0.5, vds=-0.1)
