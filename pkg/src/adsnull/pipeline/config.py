"""Run configuration: one INI file with a section per subcommand.

Values resolve in three layers: built-in defaults, then the config file
section named after the subcommand, then explicit command-line flags.
Unknown keys in a section are rejected.  The resolved mapping is hashed
into every sidecar, so identical configurations are recognizable.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .io import config_hash

_GRID_KEYS = {
    "s_min": (float, -15.0),
    "s_max": (float, 15.0),
    "ds": (float, 0.01),
    "t_min": (float, -0.5),
    "t_max": (float, 0.5),
    "dt": (float, 0.01),
}

_COMMON = {"outdir": (str, "out"), "plots": (bool, True)}

SCHEMAS: dict[str, dict] = {
    "frenet": {
        **_COMMON,
        "kappa": (float, None), "m": (int, None), "n": (int, None),
        "expr": (str, None),
        "s0": (float, 0.0), "h": (float, 1e-3),
        "length": (float, None), "num": (int, None), "periods": (float, 1.0),
    },
    "ttransform": {
        **_COMMON,
        "curve": (str, None), "frames": (str, None),
        "xi": (float, None), "c": (float, 0.0),
        "riccati_s0": (float, None), "sign": (int, 1),
    },
    "permute": {
        **_COMMON,
        "kappa": (float, None), "m": (int, None), "n": (int, None),
        "s0": (float, -2.0), "h": (float, 1e-3),
        "length": (float, 2.0),
        "xi1": (float, None), "xi2": (float, None),
        "c1": (float, 0.0), "c2": (float, 0.0),
    },
    "soliton": {
        **_COMMON, **_GRID_KEYS,
        "m": (int, 4), "n": (int, 1),
        "p": (float, 1.4), "r": (float, None),
        "c": (float, 0.0), "c_tilde": (float, 0.0),
        "bound1": (float, 2.31e-9), "bound2": (float, 1.73e-8),
    },
    "lien": {
        **_COMMON, **_GRID_KEYS,
        "kappa": (float, None), "m": (int, None), "n": (int, None),
        "p": (float, None), "r": (float, None),
        "c": (float, 0.0), "c_tilde": (float, 0.0),
    },
    "verify": {
        **_COMMON,
        "curve": (str, None), "frames": (str, None),
        "tol_det": (float, 1e-8), "tol_frame": (float, 1e-8),
        "tol_null": (float, 1e-5), "tol_proper_time": (float, 1e-4),
        "tol_bending": (float, 1e-3),
    },
    "export-torus": {
        **_COMMON,
        "frames": (str, None), "out": (str, "torus.csv"),
    },
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one subcommand invocation."""

    subcommand: str
    values: dict

    @property
    def hash(self) -> str:
        return config_hash({"subcommand": self.subcommand, **self.values})

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.values}

    def __getattr__(self, name):
        values = object.__getattribute__(self, "values")
        if name in values:
            return values[name]
        raise AttributeError(name)


def _coerce(subcommand, key, raw):
    typ = SCHEMAS[subcommand][key][0]
    if typ is bool:
        low = str(raw).strip().lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValueError(f"[{subcommand}] {key}: cannot parse boolean {raw!r}")
    return typ(raw)


def load_file_section(path, subcommand: str) -> dict:
    """Typed values from the [subcommand] section; unknown keys rejected."""
    parser = configparser.ConfigParser()
    path = Path(path)
    if not path.exists():
        raise ValueError(f"config file {path} does not exist")
    parser.read(path)
    if subcommand not in parser:
        return {}
    schema = SCHEMAS[subcommand]
    out = {}
    for key, raw in parser[subcommand].items():
        if key not in schema:
            raise ValueError(f"unknown key {key!r} in config section [{subcommand}]")
        out[key] = _coerce(subcommand, key, raw)
    return out


def resolve(subcommand: str, flag_values: dict, config_path=None) -> RunConfig:
    """Defaults, then config-file section, then flags that were given."""
    schema = SCHEMAS[subcommand]
    values = {key: default for key, (_, default) in schema.items()}
    if config_path is not None:
        values.update(load_file_section(config_path, subcommand))
    for key, val in flag_values.items():
        if val is not None:
            if key not in schema:
                raise ValueError(f"unknown option {key!r} for {subcommand}")
            values[key] = val
    _validate(subcommand, values)
    return RunConfig(subcommand, values)


def _validate(subcommand: str, values: dict):
    for key in ("h", "ds", "dt"):
        if key in values and values[key] is not None and values[key] <= 0:
            raise ValueError(f"{key} must be positive")
    for key, val in values.items():
        if key.startswith("tol_") and val is not None and val <= 0:
            raise ValueError(f"{key} must be positive")
    if subcommand in ("soliton", "lien"):
        if values["s_min"] >= values["s_max"] or values["t_min"] >= values["t_max"]:
            raise ValueError("grid bounds must satisfy min < max")
