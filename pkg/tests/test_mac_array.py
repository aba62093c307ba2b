"""Array composition: operand storage, combination, levels, quantizer."""

import numpy as np
import pytest

from sramac import (
    ArrayConfig,
    BitcellConfig,
    DacConfig,
    DegenerateError,
    M3Mode,
    RangeError,
    nominal_levels,
    quantize,
    run_mac,
    store_operand,
    with_v_bulk,
)
from sramac.mac_array import combine_bits, exhaustive_mac


def ideal_array(**kwargs):
    """Sqrt scheme, ideal ground, lambda = 0: the exact-readout regime."""
    kwargs.setdefault("cell", BitcellConfig(m3_mode=M3Mode.IDEAL_GROUND))
    return ArrayConfig(**kwargs)


class TestStoreOperand:
    def test_zero(self):
        assert store_operand(0, 4) == [0, 0, 0, 0]

    def test_all_ones(self):
        assert store_operand(15, 4) == [1, 1, 1, 1]

    def test_msb_first(self):
        assert store_operand(9, 4) == [1, 0, 0, 1]
        assert store_operand(8, 4) == [1, 0, 0, 0]

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            store_operand(16, 4)
        with pytest.raises(RangeError):
            store_operand(-1, 4)


class TestDerivedConfig:
    def test_dac_floor_tracks_device_threshold(self):
        cfg = ideal_array()
        assert cfg.dac.vth_eff == cfg.cell.vth_access()

    def test_dac_floor_tracks_bulk_bias(self):
        cfg = with_v_bulk(ideal_array(), 0.6)
        assert cfg.dac.vth_eff == pytest.approx(0.325, abs=1e-12)

    def test_t_sample_defaults_to_pulse_end(self):
        cfg = ideal_array()
        assert cfg.t_sample == cfg.t_pulse

    def test_pulse_guard_band(self):
        from sramac import wl_pulse_width_max
        cfg = ideal_array()
        bound = wl_pulse_width_max(cfg.cell, cfg.cell.vdd)
        assert cfg.t_pulse == pytest.approx(0.95 * bound, rel=1e-12)

    def test_explicit_dac_must_match(self):
        from sramac import DomainError
        with pytest.raises(DomainError):
            ArrayConfig(dac=DacConfig(n_bits=3))


class TestRunMac:
    def test_zero_stored_operand(self):
        r = run_mac(ideal_array(), 0, 9)
        assert r.code == 0 and r.exact == 0 and r.correct
        assert all(v == 1.0 for v in r.v_bit)

    def test_zero_code_no_discharge(self):
        r = run_mac(ideal_array(), 9, 0)
        assert r.code == 0 and r.correct
        assert all(v == 1.0 for v in r.v_bit)

    def test_full_scale(self):
        r = run_mac(ideal_array(), 15, 15)
        assert r.code == 225 and r.correct and r.sampling_valid

    def test_operand_range_checked(self):
        with pytest.raises(RangeError):
            run_mac(ideal_array(), 16, 3)
        with pytest.raises(RangeError):
            run_mac(ideal_array(), 3, 16)

    def test_random_pairs_exact_in_ideal_regime(self):
        cfg = ideal_array()
        levels = nominal_levels(cfg)
        rng = np.random.default_rng(11)
        for _ in range(25):
            a, b = int(rng.integers(0, 16)), int(rng.integers(0, 16))
            r = run_mac(cfg, a, b, levels=levels)
            assert r.correct, (a, b, r.code)

    def test_doubling_stored_operand_doubles_discharge(self):
        cfg = ideal_array()
        levels = nominal_levels(cfg)
        vdd = cfg.cell.vdd
        for a in (1, 3, 5, 7):
            r1 = run_mac(cfg, a, 9, levels=levels)
            r2 = run_mac(cfg, 2 * a, 9, levels=levels)
            assert vdd - r2.v_combined == pytest.approx(
                2 * (vdd - r1.v_combined), rel=1e-9
            )

    def test_monotone_in_each_operand(self):
        cfg = ideal_array()
        levels = nominal_levels(cfg)
        prev = 2.0
        for a in range(16):
            v = run_mac(cfg, a, 9, levels=levels).v_combined
            assert v < prev
            prev = v
        prev = 2.0
        for b in range(16):
            v = run_mac(cfg, 9, b, levels=levels).v_combined
            assert v < prev
            prev = v

    def test_sampling_validity_flag_trips_past_bound(self):
        base = ideal_array()
        late = ArrayConfig(
            cell=base.cell, t_pulse=3.0 * base.t_pulse
        )  # well past the saturation window
        r = run_mac(late, 15, 15)
        assert not r.sampling_valid

    def test_series_triode_full_scale_still_exact(self):
        # the ladder is anchored at the simulated full scale
        r = run_mac(ArrayConfig(), 15, 15)
        assert r.code == 225 and r.correct


class TestLevels:
    def test_product_zero_is_vdd(self):
        levels = nominal_levels(ideal_array())
        assert levels.voltage(0) == 1.0

    def test_strictly_decreasing_and_uniform(self):
        levels = nominal_levels(ideal_array())
        diffs = np.diff(levels.voltages)
        assert np.all(diffs < 0)
        assert np.allclose(diffs, diffs[0], rtol=1e-12)

    def test_ladder_matches_analog_path_per_product(self):
        # in the linear regime every realization of a product lands on its level
        cfg = ideal_array()
        levels = nominal_levels(cfg)
        for a, b in [(3, 7), (7, 3), (15, 1), (1, 15), (5, 5)]:
            r = run_mac(cfg, a, b, levels=levels)
            assert r.v_combined == pytest.approx(
                levels.voltage(a * b), abs=1e-9
            )

    def test_degenerate_spacing_raises(self):
        cfg = ideal_array()
        tiny = ArrayConfig(
            cell=cfg.cell, t_pulse=cfg.t_pulse, t_sample=cfg.t_pulse * 1e-6
        )
        with pytest.raises(DegenerateError):
            nominal_levels(tiny)


class TestQuantize:
    def _levels(self):
        return nominal_levels(ideal_array())

    def test_exact_level_maps_to_itself(self):
        levels = self._levels()
        for p in (0, 1, 100, 225):
            assert quantize(levels.voltage(p), levels) == p

    def test_midpoint_tie_goes_to_smaller_product(self):
        # exactly representable levels so the tie is bit-exact
        from sramac import LevelTable
        levels = LevelTable(
            products=np.array([10, 11]), voltages=np.array([0.5, 0.25])
        )
        assert quantize(0.375, levels) == 10

    def test_above_top_clamps_to_zero(self):
        levels = self._levels()
        assert quantize(1.5, levels) == 0

    def test_below_bottom_clamps_to_max(self):
        levels = self._levels()
        assert quantize(0.0, levels) == 225


def test_combine_bits_weighting():
    assert combine_bits([1.0, 1.0, 1.0, 1.0], 4) == 1.0
    # MSB alone carries weight 8/15
    assert combine_bits([0.0, 1.0, 1.0, 1.0], 4) == pytest.approx(7 / 15, rel=1e-12)


def test_exhaustive_nominal_exactness():
    results = exhaustive_mac(ideal_array())
    assert len(results) == 256
    assert all(r.correct for r in results)
