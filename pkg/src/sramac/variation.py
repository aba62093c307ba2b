"""Seeded Monte-Carlo engine over process and mismatch variation.

Per trial, one global (die-level) threshold shift and relative kp shift
are shared by every transistor, while threshold mismatch (Pelgrom,
sigma = avt / sqrt(W*L)) and aspect-ratio mismatch are drawn fresh per
device.  Trial i draws from the counter-based substream

    Generator(Philox(SeedSequence(seed, spawn_key=(i,))))

with a fixed draw order (globals, then per cell MSB to LSB: access then
pull-down), so results are reproducible across machines and independent
of how trials are distributed over workers.  Comparisons between bulk
biases reuse the same seed, pairing the parameter draws (common random
numbers).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .cell import BitcellConfig, CellBatch, integrate_batch
from .dac import DacConfig, WlWindow, code_to_vwl, vwl_margin, with_body_bias
from .device import DeviceParams
from .errors import DomainError, RangeError, ResampleExhausted
from .mac_array import (
    ArrayConfig,
    LevelTable,
    _sample_rows,
    nominal_levels,
    store_operand,
    with_v_bulk,
)

RNG_STREAM_RULE = "philox-seedseq-spawn-v1"
RESAMPLE_LIMIT = 100
HISTOGRAM_BINS_DEFAULT = 50


@dataclass(frozen=True)
class VariationModel:
    """Gaussian process/mismatch model; all sigmas may be zero."""

    sigma_vth0_global: float = 0.020  # V, die-level threshold shift
    avt_mismatch: float = 3.5e-9      # V*m, Pelgrom coefficient (3.5 mV*um)
    sigma_kp_rel: float = 0.03        # relative, global
    sigma_wl_rel: float = 0.02        # relative, per device

    def __post_init__(self):
        for name in ("sigma_vth0_global", "avt_mismatch", "sigma_kp_rel",
                     "sigma_wl_rel"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")


@dataclass(frozen=True)
class GlobalDraws:
    """Die-level draws shared by all devices within one trial."""

    dvth: float
    dkp_rel: float


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Counter-based substream for one trial (stable across platforms)."""
    ss = np.random.SeedSequence(seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.Philox(ss))


def sample_globals(model: VariationModel, rng: np.random.Generator) -> GlobalDraws:
    return GlobalDraws(
        dvth=float(rng.normal(0.0, model.sigma_vth0_global)),
        dkp_rel=float(rng.normal(0.0, model.sigma_kp_rel)),
    )


def sample_params(model: VariationModel, base: DeviceParams,
                  rng: np.random.Generator,
                  shared: GlobalDraws | None = None) -> DeviceParams:
    """One perturbed device; validity enforced by rejection sampling.

    The mismatch sigma follows the base geometry.  W/L scales through
    the width.  Raises ResampleExhausted after 100 invalid draws (for
    example when the shared kp draw alone makes kp nonpositive).
    """
    if shared is None:
        shared = sample_globals(model, rng)
    mis_sigma = model.avt_mismatch / math.sqrt(base.w * base.l)
    for _ in range(RESAMPLE_LIMIT):
        dvt = float(rng.normal(0.0, mis_sigma))
        dwl = float(rng.normal(0.0, model.sigma_wl_rel))
        try:
            return replace(
                base,
                vth0=base.vth0 + shared.dvth + dvt,
                kp=base.kp * (1.0 + shared.dkp_rel),
                w=base.w * (1.0 + dwl),
            )
        except DomainError:
            continue
    raise ResampleExhausted(
        f"no valid device parameters after {RESAMPLE_LIMIT} draws"
    )


def sample_trial_devices(model: VariationModel, cell: BitcellConfig,
                         n_bits: int, rng: np.random.Generator
                         ) -> list[tuple[DeviceParams, DeviceParams]]:
    """Per-bit (access, pull-down) pairs for one trial, MSB to LSB."""
    shared = sample_globals(model, rng)
    return [
        (
            sample_params(model, cell.m2acc, rng, shared),
            sample_params(model, cell.m3, rng, shared),
        )
        for _ in range(n_bits)
    ]


@dataclass(frozen=True)
class McStats:
    """Monte-Carlo output distribution for one operand pair."""

    n: int
    a: int
    b: int
    exact: int
    mean: float             # V, over successful trials
    std: float              # V, population std over successful trials
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    ber: float              # (wrong code, invalid sampling or failed) / n
    per_code_counts: dict[int, int]
    n_failed: int            # trials whose parameter sampling failed
    n_sampling_invalid: int  # trials with an access device in triode at sampling
    mean_energy: float       # J
    v_combined: np.ndarray | None = None
    codes: np.ndarray | None = None
    sampling_invalid: np.ndarray | None = None

    def summary_lines(self) -> list[str]:
        return [
            f"n: {self.n}",
            f"a: {self.a}",
            f"b: {self.b}",
            f"exact: {self.exact}",
            f"mean_V: {self.mean!r}",
            f"std_V: {self.std!r}",
            f"ber: {self.ber!r}",
            f"n_failed: {self.n_failed}",
            f"n_sampling_invalid: {self.n_sampling_invalid}",
            f"mean_energy_pJ: {self.mean_energy * 1e12!r}",
        ]


def _quantize_many(v: np.ndarray, levels: LevelTable) -> np.ndarray:
    idx = np.argmin(np.abs(v[:, None] - levels.voltages[None, :]), axis=1)
    return levels.products[idx]


def run_mc(cfg: ArrayConfig, model: VariationModel, a: int, b: int,
           n_trials: int, seed: int, workers: int = 1,
           bins: int = HISTOGRAM_BINS_DEFAULT, keep_trials: bool = False
           ) -> McStats:
    """Monte-Carlo over ``n_trials`` multiplies of a * b.

    Equivalent to running :func:`sramac.mac_array.run_mac` once per trial
    with that trial's sampled devices; trials are integrated as one batch
    (chunked over ``workers``) and reduced in trial order, so the result
    is a pure function of (config, model, operands, seed).
    """
    if n_trials < 1:
        raise RangeError(f"n_trials must be >= 1, got {n_trials}")
    if workers < 1:
        raise RangeError(f"workers must be >= 1, got {workers}")
    bits = store_operand(a, cfg.n_bits)
    if not 0 <= b <= cfg.max_code:
        raise RangeError(f"operand must be in [0, {cfg.max_code}], got {b}")
    levels = nominal_levels(cfg)
    v_wl = code_to_vwl(cfg.dac, b)
    exact = a * b
    vdd = cfg.cell.vdd

    failed = np.zeros(n_trials, dtype=bool)
    trial_devices: list[list[tuple[DeviceParams, DeviceParams]] | None] = []
    for i in range(n_trials):
        rng = trial_rng(seed, i)
        try:
            trial_devices.append(
                sample_trial_devices(model, cfg.cell, cfg.n_bits, rng)
            )
        except ResampleExhausted:
            trial_devices.append(None)
            failed[i] = True

    active = [i for i, bit in enumerate(bits) if bit == 1]
    ok_idx = np.flatnonzero(~failed)
    n_ok = len(ok_idx)
    weights = np.array(
        [1 << (cfg.n_bits - 1 - i) for i in range(cfg.n_bits)], dtype=float
    )
    wsum = weights.sum()

    v_combined = np.full(n_trials, np.nan)
    invalid = np.zeros(n_trials, dtype=bool)
    energy = np.full(n_trials, np.nan)

    if n_ok:
        if active:
            cell = replace(cfg.cell, stored_bit=1)
            n_steps, rows, frac = _sample_rows(cfg)
            rows_arr = np.array(rows)

            def integrate_chunk(chunk: np.ndarray):
                devs = []
                for t in chunk:
                    devs.extend(trial_devices[t][i] for i in active)
                batch = CellBatch.from_cells(cell, devs)
                _, v, _, reg = integrate_batch(
                    batch, v_wl, cfg.t_pulse, n_steps, rows_arr
                )
                if len(rows) == 1:
                    v_s = v[0]
                    triode = reg[0] == 2
                else:
                    v_s = v[0] + (v[1] - v[0]) * frac
                    triode = (reg[0] == 2) | (reg[1] == 2)
                return (
                    v_s.reshape(len(chunk), len(active)),
                    triode.reshape(len(chunk), len(active)),
                )

            chunks = np.array_split(ok_idx, min(workers, n_ok))
            chunks = [c for c in chunks if len(c)]
            if len(chunks) > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    parts = list(pool.map(integrate_chunk, chunks))
            else:
                parts = [integrate_chunk(c) for c in chunks]
            v_active = np.concatenate([p[0] for p in parts], axis=0)
            triode = np.concatenate([p[1] for p in parts], axis=0)

            inactive_sum = vdd * (wsum - weights[active].sum())
            v_combined[ok_idx] = (
                v_active @ weights[active] + inactive_sum
            ) / wsum
            invalid[ok_idx] = triode.any(axis=1)
            energy[ok_idx] = (
                cfg.c_unit * vdd * ((vdd - v_active) @ weights[active])
            )
        else:
            v_combined[ok_idx] = vdd
            energy[ok_idx] = 0.0

    v_ok = v_combined[ok_idx]
    codes = np.full(n_trials, -1, dtype=int)
    if n_ok:
        codes[ok_idx] = _quantize_many(v_ok, levels)
    # a trial sampled after the access device left saturation is a
    # systematic fault: its data is invalid and counts as an error even
    # when the quantizer happens to land on the exact product
    incorrect = failed | invalid | (codes != exact)
    ber = float(np.count_nonzero(incorrect)) / n_trials

    if n_ok:
        mean = float(np.mean(v_ok))
        std = float(np.std(v_ok))
        hist_counts, hist_edges = np.histogram(v_ok, bins=bins)
        mean_energy = float(np.mean(energy[ok_idx]))
    else:
        mean = float("nan")
        std = 0.0
        hist_edges = np.linspace(0.0, 1.0, bins + 1)
        hist_counts = np.zeros(bins, dtype=int)
        mean_energy = float("nan")

    code_vals, code_counts = np.unique(codes[ok_idx], return_counts=True)
    per_code = {int(c): int(k) for c, k in zip(code_vals, code_counts)}

    return McStats(
        n=n_trials,
        a=a,
        b=b,
        exact=exact,
        mean=mean,
        std=std,
        hist_edges=hist_edges,
        hist_counts=hist_counts,
        ber=ber,
        per_code_counts=per_code,
        n_failed=int(np.count_nonzero(failed)),
        n_sampling_invalid=int(np.count_nonzero(invalid)),
        mean_energy=mean_energy,
        v_combined=v_combined if keep_trials else None,
        codes=codes if keep_trials else None,
        sampling_invalid=invalid if keep_trials else None,
    )


def _ratio(num: float, den: float) -> float:
    if den == 0.0:
        return 1.0 if num == 0.0 else float("inf")
    return num / den


@dataclass(frozen=True)
class CaseComparison:
    a: int
    b: int
    baseline: McStats
    biased: McStats
    std_ratio: float  # biased / baseline
    ber_ratio: float


@dataclass(frozen=True)
class ComparisonReport:
    cases: tuple[CaseComparison, ...]
    v_bulk: float
    window_baseline: WlWindow
    window_biased: WlWindow


def compare_bias(cfg: ArrayConfig, model: VariationModel,
                 cases: list[tuple[int, int]], n_trials: int, seed: int,
                 v_bulk: float = 0.6, workers: int = 1,
                 bins: int = HISTOGRAM_BINS_DEFAULT,
                 margin_floor: float | None = None) -> ComparisonReport:
    """Paired-seed comparison of v_bulk = 0 against a forward bulk bias.

    Both arms replay the same parameter draws (same seed, draws do not
    depend on the bias), isolating the bias effect from MC noise.  The
    usable word-line windows are reported with the calibrated margin
    convention: the baseline floor (``margin_floor``, default 0.300 V)
    drops by the device's threshold reduction under the bias.
    """
    if not cases:
        raise RangeError("cases must be nonempty")
    base_dac = DacConfig(
        n_bits=cfg.n_bits,
        vdd=cfg.cell.vdd,
        scheme=cfg.scheme,
        **({"vth_eff": margin_floor} if margin_floor is not None else {}),
    )
    window_baseline = vwl_margin(base_dac)
    window_biased = vwl_margin(with_body_bias(base_dac, cfg.cell.m2acc, v_bulk))

    cfg0 = with_v_bulk(cfg, 0.0)
    cfg1 = with_v_bulk(cfg, v_bulk)
    out = []
    for a, b in cases:
        s0 = run_mc(cfg0, model, a, b, n_trials, seed, workers=workers, bins=bins)
        s1 = run_mc(cfg1, model, a, b, n_trials, seed, workers=workers, bins=bins)
        out.append(
            CaseComparison(
                a=a,
                b=b,
                baseline=s0,
                biased=s1,
                std_ratio=_ratio(s1.std, s0.std),
                ber_ratio=_ratio(s1.ber, s0.ber),
            )
        )
    return ComparisonReport(
        cases=tuple(out),
        v_bulk=v_bulk,
        window_baseline=window_baseline,
        window_biased=window_biased,
    )
