"""Run configuration: YAML loading, validation, resolved echo, hashing.

The file is a nested key/value tree with sections ``cell`` (including
``m2acc``/``m3`` device blocks), ``array``, ``dac``, ``variation`` and
``run``.  Every field is optional and falls back to its documented
default.  Unknown keys are rejected with the dotted path of the
offender.  ``dac.vth_eff: null`` (the default) derives the DAC floor
from the access device; ``array.t_pulse``/``t_sample: null`` derive the
timing from the worst-case saturation bound.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields

import yaml

from .cell import BitcellConfig, M3Mode
from .dac import DacConfig, DacScheme
from .device import DeviceParams
from .errors import ConfigError, SimError
from .mac_array import ArrayConfig
from .variation import RNG_STREAM_RULE, VariationModel

ENV_CONFIG_PATH = "SRAMAC_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    """Fully assembled configuration for one CLI invocation."""

    array: ArrayConfig = field(default_factory=ArrayConfig)
    variation: VariationModel = field(default_factory=VariationModel)
    seed: int = 1
    trials: int = 1000
    workers: int = 1
    histogram_bins: int = 50
    # explicit DAC floor if the user pinned one (margin reporting keeps
    # the calibrated 0.300 V convention otherwise)
    margin_floor: float | None = None

    def resolved_dict(self) -> dict:
        a = self.array
        c = a.cell

        def dev(d: DeviceParams) -> dict:
            return {
                "vth0": d.vth0,
                "gamma": d.gamma,
                "phi2f": d.phi2f,
                "kp": d.kp,
                "w": d.w,
                "l": d.l,
                "lambda": d.lambda_,
            }

        return {
            "cell": {
                "vdd": c.vdd,
                "c_blb": c.c_blb,
                "v_bulk": c.v_bulk,
                "stored_bit": c.stored_bit,
                "m3_mode": c.m3_mode.value,
                "m2acc": dev(c.m2acc),
                "m3": dev(c.m3),
            },
            "array": {
                "n_bits": a.n_bits,
                "scheme": a.scheme.value,
                "c_unit": a.c_unit,
                "t_pulse": a.t_pulse,
                "t_sample": a.t_sample,
                "dt_divisor": a.dt_divisor,
            },
            "dac": {
                "vth_eff": self.margin_floor,
                "vwl_max": a.dac.vwl_max,
            },
            "variation": {
                "sigma_vth0_global": self.variation.sigma_vth0_global,
                "avt_mismatch": self.variation.avt_mismatch,
                "sigma_kp_rel": self.variation.sigma_kp_rel,
                "sigma_wl_rel": self.variation.sigma_wl_rel,
            },
            # workers is execution topology, not simulation semantics:
            # results are worker-count independent, so it is not echoed.
            "run": {
                "seed": self.seed,
                "trials": self.trials,
                "histogram_bins": self.histogram_bins,
                "rng": RNG_STREAM_RULE,
            },
        }

    def config_hash(self) -> str:
        text = yaml.safe_dump(self.resolved_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


class _Node:
    """One mapping being consumed; leftover keys are reported by path."""

    def __init__(self, data, path: str):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path or '<root>'}: expected a mapping")
        self.data = dict(data)
        self.path = path

    def _key(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def child(self, key: str) -> "_Node":
        return _Node(self.data.pop(key, {}), self._key(key))

    def take_float(self, key: str, default, nullable: bool = False):
        if key not in self.data:
            return default
        val = self.data.pop(key)
        if val is None:
            if nullable:
                return None
            raise ConfigError(f"{self._key(key)}: must not be null")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{self._key(key)}: expected a number, got {val!r}")
        return float(val)

    def take_int(self, key: str, default):
        if key not in self.data:
            return default
        val = self.data.pop(key)
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{self._key(key)}: expected an integer, got {val!r}")
        return val

    def take_enum(self, key: str, enum_cls, default):
        if key not in self.data:
            return default
        val = self.data.pop(key)
        try:
            return enum_cls(val)
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            raise ConfigError(
                f"{self._key(key)}: expected one of [{allowed}], got {val!r}"
            ) from None

    def take_str(self, key: str, default):
        if key not in self.data:
            return default
        val = self.data.pop(key)
        if not isinstance(val, str):
            raise ConfigError(f"{self._key(key)}: expected a string, got {val!r}")
        return val

    def finish(self):
        if self.data:
            key = sorted(self.data)[0]
            raise ConfigError(f"{self._key(key)}: unknown key")


def _device_from(node: _Node) -> DeviceParams:
    defaults = DeviceParams()
    kwargs = {}
    for f in fields(DeviceParams):
        key = "lambda" if f.name == "lambda_" else f.name
        kwargs[f.name] = node.take_float(key, getattr(defaults, f.name))
    node.finish()
    try:
        return DeviceParams(**kwargs)
    except SimError as exc:
        raise ConfigError(f"{node.path}: {exc}") from exc


def config_from_dict(data: dict) -> RunConfig:
    root = _Node(data, "")

    cell_node = root.child("cell")
    m2acc = _device_from(cell_node.child("m2acc"))
    m3 = _device_from(cell_node.child("m3"))
    cell_defaults = BitcellConfig()
    cell_kwargs = dict(
        vdd=cell_node.take_float("vdd", cell_defaults.vdd),
        c_blb=cell_node.take_float("c_blb", cell_defaults.c_blb),
        v_bulk=cell_node.take_float("v_bulk", cell_defaults.v_bulk),
        stored_bit=cell_node.take_int("stored_bit", cell_defaults.stored_bit),
        m3_mode=cell_node.take_enum("m3_mode", M3Mode, cell_defaults.m3_mode),
        m2acc=m2acc,
        m3=m3,
    )
    cell_node.finish()

    array_node = root.child("array")
    arr_defaults = ArrayConfig.__dataclass_fields__
    n_bits = array_node.take_int("n_bits", 4)
    scheme = array_node.take_enum("scheme", DacScheme, DacScheme.SQRT)
    c_unit = array_node.take_float("c_unit", arr_defaults["c_unit"].default)
    t_pulse = array_node.take_float("t_pulse", None, nullable=True)
    t_sample = array_node.take_float("t_sample", None, nullable=True)
    dt_divisor = array_node.take_int(
        "dt_divisor", arr_defaults["dt_divisor"].default
    )
    array_node.finish()

    dac_node = root.child("dac")
    vth_eff = dac_node.take_float("vth_eff", None, nullable=True)
    vwl_max = dac_node.take_float("vwl_max", None, nullable=True)
    dac_node.finish()

    var_node = root.child("variation")
    var_defaults = VariationModel()
    var_kwargs = {
        f.name: var_node.take_float(f.name, getattr(var_defaults, f.name))
        for f in fields(VariationModel)
    }
    var_node.finish()

    run_node = root.child("run")
    seed = run_node.take_int("seed", 1)
    trials = run_node.take_int("trials", 1000)
    workers = run_node.take_int("workers", 1)
    histogram_bins = run_node.take_int("histogram_bins", 50)
    run_node.take_str("rng", RNG_STREAM_RULE)  # informational, echoed back
    run_node.finish()

    root.finish()

    try:
        cell = BitcellConfig(**cell_kwargs)
        dac = None
        if vth_eff is not None or vwl_max is not None:
            dac = DacConfig(
                n_bits=n_bits,
                vdd=cell.vdd,
                vth_eff=vth_eff if vth_eff is not None else cell.vth_access(),
                scheme=scheme,
                vwl_max=vwl_max if vwl_max is not None else cell.vdd,
            )
        array = ArrayConfig(
            cell=cell,
            n_bits=n_bits,
            scheme=scheme,
            dac=dac,
            t_pulse=t_pulse,
            t_sample=t_sample,
            c_unit=c_unit,
            dt_divisor=dt_divisor,
        )
        variation = VariationModel(**var_kwargs)
    except SimError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        array=array,
        variation=variation,
        seed=seed,
        trials=trials,
        workers=workers,
        histogram_bins=histogram_bins,
        margin_floor=vth_eff,
    )


def load_config(path: str | None) -> RunConfig:
    """Config from a YAML file; all defaults when ``path`` is None.

    Falls back to the SRAMAC_CONFIG environment variable when no path is
    given.
    """
    if path is None:
        path = os.environ.get(ENV_CONFIG_PATH) or None
    if path is None:
        return config_from_dict({})
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must contain a mapping")
    return config_from_dict(data)


def apply_overrides(cfg: RunConfig, *, seed=None, trials=None, workers=None,
                    v_bulk=None, scheme=None) -> RunConfig:
    """Rebuild the config with CLI flag values layered on top."""
    data = cfg.resolved_dict()
    data["run"].pop("rng", None)
    if seed is not None:
        data["run"]["seed"] = seed
    if trials is not None:
        data["run"]["trials"] = trials
    if workers is not None:
        data["run"]["workers"] = workers
    if v_bulk is not None:
        # the DAC floor re-derives for the new bias, but the resolved
        # word-line timing is kept so bias comparisons share a time base
        data["cell"]["v_bulk"] = v_bulk
    if scheme is not None:
        data["array"]["scheme"] = scheme
    return config_from_dict(data)
