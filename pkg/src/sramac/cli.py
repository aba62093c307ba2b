"""Command-line front end.

Subcommands: simulate | sweep | mac | montecarlo | compare.  Exit codes:
0 success, 2 usage/config error, 3 simulation failure.  All output files
embed the resolved config and seed; identical invocations reproduce
identical bytes.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .cell import simulate_discharge
from .config import RunConfig, apply_overrides, load_config
from .dac import DacConfig, DacScheme, code_to_vwl, vwl_margin
from .device import BiasPoint, drain_current
from .energy import mac_energy
from .errors import ConfigError, RangeError, SimError
from .mac_array import ArrayConfig, exhaustive_mac, run_mac, with_v_bulk
from .report import fmt, meta_lines, write_csv, write_lines
from .variation import compare_bias, run_mc

BIASED_ARM_V_BULK = 0.6  # forward bulk bias of the threshold-suppressed arm


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sramac",
        description="Analog in-SRAM multiply-accumulate behavioral simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (or $SRAMAC_CONFIG)")
    common.add_argument("--seed", type=int, help="RNG seed override")
    common.add_argument("--trials", type=int, help="Monte-Carlo trial count override")
    common.add_argument("--workers", type=int, help="worker count override")
    common.add_argument("--v-bulk", type=float, dest="v_bulk",
                        help="access-device bulk bias override [V]")
    common.add_argument("--scheme", choices=["linear", "sqrt"],
                        help="DAC coding scheme override")

    p = sub.add_parser("simulate", parents=[common],
                       help="single-cell discharge trace CSV")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--v-wl", type=float, dest="v_wl", help="word-line amplitude [V]")
    g.add_argument("--code", type=int, help="operand code mapped through the DAC")
    p.add_argument("--out", required=True, help="trace CSV path")

    p = sub.add_parser("sweep", parents=[common],
                       help="parameter sweep CSV (threshold, discharge, current, energy)")
    p.add_argument("--axis", required=True,
                   choices=["v-bulk", "width", "code", "t-sample"])
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--values", help="comma-separated explicit axis values")
    p.add_argument("--v-wl", type=float, dest="v_wl",
                   help="word-line amplitude [V] (default: max-code DAC level)")
    p.add_argument("--code", type=int, help="operand code for the word line")
    p.add_argument("--out", required=True)

    p = sub.add_parser("mac", parents=[common], help="one multiply, printed summary")
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.add_argument("--out", help="also write the summary (with config header)")
    p.add_argument("--table", help="write the full nominal product table CSV")

    p = sub.add_parser("montecarlo", parents=[common],
                       help="Monte-Carlo accuracy statistics")
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.add_argument("--out", required=True, help="stats summary path")
    p.add_argument("--dump-trials", dest="dump_trials",
                   help="also write a per-trial CSV")

    p = sub.add_parser("compare", parents=[common],
                       help="baseline vs threshold-suppressed comparison table")
    p.add_argument("--cases", default="15x15",
                   help="comma-separated AxB operand pairs (default 15x15)")
    p.add_argument("--out", help="report path (stdout only when omitted)")

    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    return apply_overrides(
        cfg,
        seed=args.seed,
        trials=args.trials,
        workers=args.workers,
        v_bulk=args.v_bulk,
        scheme=args.scheme,
    )


def cmd_simulate(cfg: RunConfig, args) -> int:
    array = cfg.array
    if args.code is not None:
        v_wl = code_to_vwl(array.dac, args.code)
    else:
        v_wl = args.v_wl
    dt = array.t_pulse / array.dt_divisor
    trace = simulate_discharge(array.cell, v_wl, array.t_pulse, dt)
    meta = meta_lines(cfg, "simulate",
                      {"v_wl": v_wl, "t_pulse": array.t_pulse, "dt": dt})
    rows = [
        (t, v, vx, reg.value)
        for t, v, vx, reg in zip(trace.times, trace.v_blb,
                                 trace.v_internal, trace.regions)
    ]
    write_csv(args.out, meta, ["t_s", "v_blb_V", "v_x_V", "region"], rows)
    print(f"wrote {args.out} ({len(rows)} samples)")
    return 0


def _axis_values(args) -> list[float]:
    if args.values is not None:
        try:
            vals = [float(v) for v in args.values.split(",") if v.strip() != ""]
        except ValueError:
            raise ConfigError(f"--values could not be parsed: {args.values!r}")
    else:
        if args.start is None or args.stop is None or args.points is None:
            raise ConfigError(
                "sweep needs either --values or all of --start/--stop/--points"
            )
        if args.points < 1:
            raise ConfigError(f"--points must be >= 1, got {args.points}")
        vals = list(np.linspace(args.start, args.stop, args.points))
    if not vals:
        raise ConfigError("sweep range is empty")
    return vals


def cmd_sweep(cfg: RunConfig, args) -> int:
    values = _axis_values(args)
    array = cfg.array
    base_cell = replace(array.cell, stored_bit=1)
    if args.code is not None:
        base_v_wl = code_to_vwl(array.dac, args.code)
    elif args.v_wl is not None:
        base_v_wl = args.v_wl
    else:
        base_v_wl = code_to_vwl(array.dac, array.max_code)
    t_pulse = array.t_pulse
    dt = t_pulse / array.dt_divisor
    col = {"v-bulk": "v_bulk_V", "width": "width_m",
           "code": "code", "t-sample": "t_sample_s"}[args.axis]

    rows = []
    for val in values:
        cell = base_cell
        v_wl = base_v_wl
        t_sample = min(array.t_sample, t_pulse)
        if args.axis == "v-bulk":
            cell = replace(base_cell, v_bulk=val)
        elif args.axis == "width":
            cell = replace(base_cell, m2acc=replace(base_cell.m2acc, w=val))
        elif args.axis == "code":
            code = int(val)
            if code != val:
                raise ConfigError(f"code axis values must be integers, got {val}")
            v_wl = code_to_vwl(array.dac, code)
        elif args.axis == "t-sample":
            t_sample = val
        trace = simulate_discharge(cell, v_wl, t_pulse, dt)
        vth_eff = cell.vth_access()
        vx0 = float(trace.v_internal[0])
        i0 = drain_current(
            cell.m2acc,
            BiasPoint(vgs=v_wl - vx0, vds=max(cell.vdd - vx0, 0.0),
                      vsb=vx0 - cell.v_bulk),
        ) if v_wl - vx0 > 0 else 0.0
        k = int(np.searchsorted(trace.times, t_sample))
        k = min(max(k, 0), len(trace.times) - 1)
        if trace.times[k] > t_sample and k > 0:
            frac = (t_sample - trace.times[k - 1]) / (trace.times[k] - trace.times[k - 1])
            v_s = float(trace.v_blb[k - 1] + (trace.v_blb[k] - trace.v_blb[k - 1]) * frac)
        else:
            v_s = float(trace.v_blb[k])
        energy = cell.c_blb * cell.vdd * (cell.vdd - v_s)
        axis_out = int(val) if args.axis == "code" else val
        rows.append((axis_out, vth_eff, v_wl, v_s, i0, energy))

    meta = meta_lines(cfg, "sweep", {
        "axis": args.axis,
        "values": ";".join(fmt(v) for v in values),
        "v_wl": base_v_wl,
    })
    write_csv(args.out, meta,
              [col, "vth_eff_V", "v_wl_V", "v_blb_V", "i0_A", "energy_J"], rows)
    print(f"wrote {args.out} ({len(rows)} points)")
    return 0


def _mac_lines(cfg: RunConfig, result) -> list[str]:
    report = mac_energy(cfg.array, result)
    return [
        f"a: {result.a}",
        f"b: {result.b}",
        f"v_wl_V: {result.v_wl!r}",
        "v_bit_V: " + ",".join(repr(v) for v in result.v_bit),
        "regions: " + ",".join(r.value for r in result.regions),
        f"v_combined_V: {result.v_combined!r}",
        f"code: {result.code}",
        f"exact: {result.exact}",
        f"correct: {str(result.correct).lower()}",
        f"sampling_valid: {str(result.sampling_valid).lower()}",
        f"energy_pJ: {report.e_total * 1e12!r}",
    ]


def cmd_mac(cfg: RunConfig, args) -> int:
    result = run_mac(cfg.array, args.a, args.b)
    lines = _mac_lines(cfg, result)
    print("\n".join(lines))
    if args.out:
        write_lines(args.out, meta_lines(cfg, "mac", {"a": args.a, "b": args.b}) + lines)
    if args.table:
        results = exhaustive_mac(cfg.array)
        rows = [
            (r.a, r.b, r.v_combined, r.code, r.exact,
             str(r.correct).lower(), mac_energy(cfg.array, r).e_total)
            for r in results
        ]
        write_csv(args.table, meta_lines(cfg, "mac-table", {}),
                  ["a", "b", "v_combined_V", "code", "exact", "correct", "energy_J"],
                  rows)
        print(f"wrote {args.table} ({len(rows)} pairs)")
    return 0


def cmd_montecarlo(cfg: RunConfig, args) -> int:
    keep = args.dump_trials is not None
    stats = run_mc(cfg.array, cfg.variation, args.a, args.b,
                   cfg.trials, cfg.seed, workers=cfg.workers,
                   bins=cfg.histogram_bins, keep_trials=keep)
    params = {"a": args.a, "b": args.b, "trials": cfg.trials}
    lines = stats.summary_lines()
    write_lines(args.out, meta_lines(cfg, "montecarlo", params) + lines)
    hist_path = Path(args.out).with_suffix(".hist.csv")
    hist_rows = [
        (stats.hist_edges[i], stats.hist_edges[i + 1], int(stats.hist_counts[i]))
        for i in range(len(stats.hist_counts))
    ]
    write_csv(hist_path, meta_lines(cfg, "montecarlo", params),
              ["bin_low_V", "bin_high_V", "count"], hist_rows)
    if keep:
        trial_rows = [
            (i, stats.v_combined[i], int(stats.codes[i]), stats.exact,
             str(int(stats.codes[i]) == stats.exact).lower(),
             str(not bool(stats.sampling_invalid[i])).lower())
            for i in range(stats.n)
        ]
        write_csv(args.dump_trials, meta_lines(cfg, "montecarlo", params),
                  ["trial", "v_combined_V", "code", "exact", "correct",
                   "sampling_valid"],
                  trial_rows)
    print("\n".join(lines))
    print(f"wrote {args.out} and {hist_path}")
    return 0


def _parse_cases(text: str) -> list[tuple[int, int]]:
    cases = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            a, b = part.split("x")
            cases.append((int(a), int(b)))
        except ValueError:
            raise ConfigError(f"case {part!r} is not of the form AxB")
    if not cases:
        raise ConfigError("no cases given")
    return cases


def cmd_compare(cfg: RunConfig, args) -> int:
    cases = _parse_cases(args.cases)
    v_bulk = BIASED_ARM_V_BULK if args.v_bulk is None else args.v_bulk
    array = cfg.array
    sqrt_cfg = ArrayConfig(
        cell=array.cell, n_bits=array.n_bits, scheme=DacScheme.SQRT,
        c_unit=array.c_unit, dt_divisor=array.dt_divisor,
    )
    report = compare_bias(sqrt_cfg, cfg.variation, cases, cfg.trials, cfg.seed,
                          v_bulk=v_bulk, workers=cfg.workers,
                          bins=cfg.histogram_bins,
                          margin_floor=cfg.margin_floor)
    linear_cfg = with_v_bulk(
        ArrayConfig(cell=array.cell, n_bits=array.n_bits, scheme=DacScheme.LINEAR,
                    c_unit=array.c_unit, dt_divisor=array.dt_divisor),
        0.0,
    )
    margin_kwargs = (
        {"vth_eff": cfg.margin_floor} if cfg.margin_floor is not None else {}
    )
    window_linear = vwl_margin(DacConfig(
        n_bits=array.n_bits, vdd=array.cell.vdd, scheme=DacScheme.LINEAR,
        **margin_kwargs,
    ))

    lines = []
    for case in report.cases:
        lin = run_mc(linear_cfg, cfg.variation, case.a, case.b, cfg.trials,
                     cfg.seed, workers=cfg.workers, bins=cfg.histogram_bins)
        lines.append(f"case: a={case.a} b={case.b} exact={case.a * case.b}")
        for label, window, stats, bias in (
            ("linear-baseline", window_linear, lin, 0.0),
            ("sqrt-baseline", report.window_baseline, case.baseline, 0.0),
            ("sqrt-body-biased", report.window_biased, case.biased, v_bulk),
        ):
            lines.append(
                f"  arm: {label} v_bulk_V={bias!r} "
                f"window_V=[{window.floor!r}, {window.ceiling!r}] "
                f"std_V={stats.std!r} ber={stats.ber!r} "
                f"mean_energy_pJ={stats.mean_energy * 1e12!r}"
            )
        lines.append(f"  std_ratio_biased_over_baseline: {case.std_ratio!r}")
        lines.append(f"  ber_ratio_biased_over_baseline: {case.ber_ratio!r}")

    meta = meta_lines(cfg, "compare", {
        "cases": args.cases, "trials": cfg.trials, "v_bulk": v_bulk,
    })
    print("\n".join(lines))
    if args.out:
        write_lines(args.out, meta + lines)
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "mac": cmd_mac,
    "montecarlo": cmd_montecarlo,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    raise SystemExit(main())
