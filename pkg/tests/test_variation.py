"""Monte-Carlo engine: sampling, determinism, pairing, variance direction."""

import math

import numpy as np
import pytest

from sramac import (
    ArrayConfig,
    BitcellConfig,
    DeviceParams,
    M3Mode,
    RangeError,
    ResampleExhausted,
    VariationModel,
    compare_bias,
    run_mac,
    run_mc,
    sample_params,
    sample_trial_devices,
    trial_rng,
)

ZERO = VariationModel(0.0, 0.0, 0.0, 0.0)


def ideal_array():
    return ArrayConfig(cell=BitcellConfig(m3_mode=M3Mode.IDEAL_GROUND))


class TestSampling:
    def test_zero_sigma_returns_base_exactly(self):
        base = DeviceParams()
        out = sample_params(ZERO, base, trial_rng(1, 0))
        assert out == base

    def test_same_seed_same_params(self):
        model = VariationModel()
        base = DeviceParams()
        p1 = sample_params(model, base, trial_rng(9, 4))
        p2 = sample_params(model, base, trial_rng(9, 4))
        assert p1 == p2

    def test_different_trials_differ(self):
        model = VariationModel()
        base = DeviceParams()
        p1 = sample_params(model, base, trial_rng(9, 0))
        p2 = sample_params(model, base, trial_rng(9, 1))
        assert p1 != p2

    def test_mismatch_std_matches_pelgrom(self):
        base = DeviceParams()
        model = VariationModel(sigma_vth0_global=0.0, avt_mismatch=3.5e-9,
                               sigma_kp_rel=0.0, sigma_wl_rel=0.0)
        rng = trial_rng(12, 0)
        draws = np.array([
            sample_params(model, base, rng).vth0 - base.vth0
            for _ in range(10000)
        ])
        expected = 3.5e-9 / math.sqrt(base.w * base.l)
        assert np.std(draws) == pytest.approx(expected, rel=0.05)

    def test_global_draws_shared_within_trial(self):
        model = VariationModel(sigma_vth0_global=0.05, avt_mismatch=0.0,
                               sigma_kp_rel=0.05, sigma_wl_rel=0.0)
        devices = sample_trial_devices(model, BitcellConfig(), 4, trial_rng(5, 2))
        shifts = {round(d.vth0 - 0.45, 15) for pair in devices for d in pair}
        kps = {round(d.kp / 200e-6, 12) for pair in devices for d in pair}
        assert len(shifts) == 1 and len(kps) == 1

    def test_mismatch_fresh_per_device(self):
        model = VariationModel(sigma_vth0_global=0.0, avt_mismatch=3.5e-9,
                               sigma_kp_rel=0.0, sigma_wl_rel=0.0)
        devices = sample_trial_devices(model, BitcellConfig(), 4, trial_rng(5, 2))
        vths = [d.vth0 for pair in devices for d in pair]
        assert len(set(vths)) == len(vths)

    def test_resample_exhausted_on_impossible_global(self):
        # a huge shared kp sigma eventually lands a draw below -100%,
        # which no amount of per-device resampling can fix
        model = VariationModel(sigma_vth0_global=0.0, avt_mismatch=0.0,
                               sigma_kp_rel=1e6, sigma_wl_rel=0.0)
        base = DeviceParams()
        raised = False
        for trial in range(20):
            try:
                sample_params(model, base, trial_rng(0, trial))
            except ResampleExhausted:
                raised = True
                break
        assert raised


class TestRunMc:
    def test_zero_variation_collapses(self):
        stats = run_mc(ideal_array(), ZERO, 15, 15, 32, seed=1)
        assert stats.std == 0.0
        assert stats.ber == 0.0
        assert stats.n_failed == 0

    def test_zero_variation_matches_nominal_mac(self):
        cfg = ideal_array()
        stats = run_mc(cfg, ZERO, 7, 9, 8, seed=1)
        nominal = run_mac(cfg, 7, 9)
        assert stats.mean == pytest.approx(nominal.v_combined, abs=1e-12)

    def test_batched_engine_matches_per_trial_run_mac(self):
        cfg = ideal_array()
        model = VariationModel()
        seed, n = 77, 6
        stats = run_mc(cfg, model, 11, 13, n, seed=seed, keep_trials=True)
        for i in range(n):
            devices = sample_trial_devices(model, cfg.cell, cfg.n_bits,
                                           trial_rng(seed, i))
            r = run_mac(cfg, 11, 13, devices=devices)
            assert stats.v_combined[i] == pytest.approx(r.v_combined, rel=1e-12)
            assert stats.codes[i] == r.code

    def test_deterministic_across_worker_counts(self):
        cfg = ideal_array()
        model = VariationModel()
        s1 = run_mc(cfg, model, 15, 15, 40, seed=5, workers=1, keep_trials=True)
        s4 = run_mc(cfg, model, 15, 15, 40, seed=5, workers=4, keep_trials=True)
        assert np.array_equal(s1.v_combined, s4.v_combined)
        assert s1.std == s4.std and s1.mean == s4.mean and s1.ber == s4.ber
        assert np.array_equal(s1.hist_counts, s4.hist_counts)
        assert np.array_equal(s1.hist_edges, s4.hist_edges)

    def test_histogram_counts_conserved(self):
        stats = run_mc(ideal_array(), VariationModel(), 15, 15, 64, seed=2)
        assert int(stats.hist_counts.sum()) == stats.n - stats.n_failed

    def test_per_code_counts_sum(self):
        stats = run_mc(ideal_array(), VariationModel(), 15, 15, 64, seed=2)
        assert sum(stats.per_code_counts.values()) == stats.n - stats.n_failed

    def test_stored_zero_operand(self):
        stats = run_mc(ideal_array(), VariationModel(), 0, 9, 16, seed=3)
        assert stats.std == 0.0 and stats.ber == 0.0
        assert stats.mean == 1.0 and stats.mean_energy == 0.0

    def test_trial_count_validated(self):
        with pytest.raises(RangeError):
            run_mc(ideal_array(), ZERO, 1, 1, 0, seed=1)

    def test_energy_matches_mac_energy(self):
        from sramac import mac_energy
        cfg = ideal_array()
        stats = run_mc(cfg, ZERO, 9, 11, 4, seed=1)
        nominal = mac_energy(cfg, run_mac(cfg, 9, 11)).e_total
        assert stats.mean_energy == pytest.approx(nominal, rel=1e-12)


class TestVarianceDirection:
    def test_forward_bias_tightens_distribution(self):
        # the core accuracy mechanism: larger overdrive makes the squared
        # overdrive relatively less sensitive to threshold perturbations
        report = compare_bias(ArrayConfig(), VariationModel(), [(15, 15)],
                              n_trials=200, seed=21)
        case = report.cases[0]
        assert case.biased.std < case.baseline.std
        assert case.biased.ber <= case.baseline.ber

    def test_paired_draws_identical_across_arms(self):
        cfg = ArrayConfig()
        model = VariationModel()
        d0 = sample_trial_devices(model, cfg.cell, 4, trial_rng(33, 7))
        from sramac.mac_array import with_v_bulk
        cfg1 = with_v_bulk(cfg, 0.6)
        d1 = sample_trial_devices(model, cfg1.cell, 4, trial_rng(33, 7))
        assert d0 == d1

    def test_zero_variation_ratios_are_one(self):
        report = compare_bias(ideal_array(), ZERO, [(15, 15), (3, 5)],
                              n_trials=8, seed=1)
        for case in report.cases:
            assert case.std_ratio == 1.0
            assert case.ber_ratio == 1.0

    def test_windows_reported(self):
        report = compare_bias(ArrayConfig(), ZERO, [(1, 1)], n_trials=2, seed=1)
        assert report.window_baseline.floor == pytest.approx(0.300, abs=1e-12)
        assert report.window_biased.floor == pytest.approx(0.175, abs=1e-12)
        assert report.window_biased.ceiling == 0.700

    def test_empty_cases_rejected(self):
        with pytest.raises(RangeError):
            compare_bias(ideal_array(), ZERO, [], 4, seed=1)
