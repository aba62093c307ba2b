"""Output files: comment headers with embedded config, CSV/text writers.

Every file starts with ``#`` comment lines carrying the tool version,
the command with its parameters, the seed, a config hash and the full
resolved config as indented YAML.  Re-running the command extracted
from a header reproduces the file byte for byte (nothing time- or
host-dependent is written).
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .config import RunConfig, config_from_dict

_CONFIG_PREFIX = "#   "


def fmt(x) -> str:
    """Canonical cell formatting: shortest round-trip repr for floats."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):  # incl. numpy float64, normalized first
        return repr(float(x))
    return str(x)


def meta_lines(cfg: RunConfig, command: str, params: dict) -> list[str]:
    arg_text = " ".join(f"{k}={fmt(v)}" for k, v in params.items())
    lines = [
        "# sramac v0.1.0",
        f"# command: {command} {arg_text}".rstrip(),
        f"# seed: {cfg.seed}",
        f"# config-hash: {cfg.config_hash()}",
        "# config:",
    ]
    dumped = yaml.safe_dump(cfg.resolved_dict(), sort_keys=False,
                            default_flow_style=False)
    lines.extend(_CONFIG_PREFIX + ln for ln in dumped.splitlines())
    return lines


def write_lines(path, lines: list[str]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def write_csv(path, meta: list[str], header: list[str], rows) -> None:
    lines = list(meta)
    lines.append(",".join(header))
    lines.extend(",".join(fmt(c) for c in row) for row in rows)
    write_lines(path, lines)


def read_embedded(path) -> tuple[RunConfig, str, dict]:
    """Recover (config, command, params) from a file's comment header."""
    command = ""
    params: dict[str, str] = {}
    config_lines: list[str] = []
    in_config = False
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.startswith("#"):
                break
            if line.startswith(_CONFIG_PREFIX) and in_config:
                config_lines.append(line[len(_CONFIG_PREFIX):])
            elif line.startswith("# command: "):
                parts = line[len("# command: "):].split()
                command = parts[0]
                params = dict(p.split("=", 1) for p in parts[1:])
            elif line == "# config:":
                in_config = True
            else:
                in_config = False
    data = yaml.safe_load("\n".join(config_lines)) or {}
    data.get("run", {}).pop("rng", None)
    return config_from_dict(data), command, params
