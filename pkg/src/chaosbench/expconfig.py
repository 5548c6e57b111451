"""Strict, flat experiment configuration.

Config files are line-oriented ``key = value`` text with one section per
concern.  Parsing is strict: an unknown section or key fails fast naming the
offender, so a typo can never silently fall back to a default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError

EXPERIMENT_KINDS = (
    "simulate", "horizon", "lyapunov", "entropy-classical", "entropy-quantum",
    "analog-nc", "sample-compare", "supremacy-report",
)

# value parsers keyed by a short type tag
def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


_PARSERS = {
    "int": int,
    "float": float,
    "str": str.strip,
    "bool": _parse_bool,
    "floats": lambda s: tuple(float(x) for x in s.split(",")),
    "ints": lambda s: tuple(int(x) for x in s.split(",")),
    # decimal string kept verbatim (noise sigmas below double range)
    "decimal": str.strip,
}

_SYSTEM_KEYS = {
    "preset": "str",
    "alpha": "float", "beta": "float", "delta": "float", "gamma": "float",
    "omega": "float", "sigma": "float", "r": "float", "b": "float",
}

_PRECISION_KEYS = {
    "mantissa_bits": "int", "method_order": "int",
    "step_size": "float", "output_stride": "int",
}

_OUTPUT_KEYS = {"dir": "str", "tag": "str"}

_LIMITS_KEYS = {"wall_seconds": "float", "max_mib": "float"}

SCHEMAS = {
    "simulate": {
        "run": {"t": "float", "x0": "floats", "seed": "int"},
    },
    "horizon": {
        "run": {"x0": "floats", "tol": "float", "t_max": "float",
                "ladder_bits": "ints", "rate_hint": "float",
                "validation_order": "int", "sample_every": "float", "seed": "int"},
    },
    "lyapunov": {
        "run": {"x0": "floats", "t_total": "float", "renorm_interval": "float",
                "burn_in": "float", "seed": "int"},
    },
    "entropy-classical": {
        "run": {"cell": "floats", "cells": "int", "k": "int", "t": "float",
                "sample_dt": "float", "eps": "float",
                "box_lower": "floats", "box_upper": "floats", "seed": "int",
                "kick_every": "float"},
    },
    "entropy-quantum": {
        "run": {"n": "int", "m": "int", "steps": "int", "state": "str",
                "q0": "float", "p0": "float", "seed": "int",
                "classical_k": "int", "figure": "bool"},
    },
    "analog-nc": {
        "run": {"x0": "floats", "sigma_alpha": "decimal", "sigma_gamma": "decimal",
                "sigma_omega": "decimal", "tau": "float", "max_cycles": "int",
                "ensemble": "int", "threshold": "float", "criterion": "str",
                "seed": "int"},
    },
    "sample-compare": {
        "run": {"cycles": "int", "burn_in": "int", "grid": "int",
                "box": "floats", "x0_a": "floats", "x0_b": "floats",
                "doubling_check": "bool", "seed": "int"},
    },
    "supremacy-report": {
        "run": {"x0": "floats", "sigma_alpha": "decimal", "sigma_gamma": "decimal",
                "sigma_omega": "decimal", "tau": "float", "max_cycles": "int",
                "ensemble": "int", "criterion": "str", "seed": "int",
                "digital_ladder_bits": "ints", "digital_tol": "float",
                "digital_t_max": "float", "noise_mantissa_bits": "int",
                "noise_method_order": "int", "noise_steps_per_cycle": "int"},
    },
}

DEFAULT_PRESET = {
    "simulate": "lorenz-classic",
    "horizon": "lorenz-classic",
    "lyapunov": "lorenz-classic",
    "entropy-classical": "lorenz-classic",
    "entropy-quantum": "lorenz-classic",      # unused by the quantum model itself
    "analog-nc": "duffing-holmes",
    "sample-compare": "duffing-holmes",
    "supremacy-report": "duffing-holmes",
}


@dataclass
class ExperimentConfig:
    kind: str
    system: dict = field(default_factory=dict)
    precision: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    limits: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        return {
            "experiment": {"kind": self.kind},
            "system": dict(sorted(self.system.items())),
            "precision": dict(sorted(self.precision.items())),
            "run": {k: list(v) if isinstance(v, tuple) else v
                    for k, v in sorted(self.run.items())},
            "output": dict(sorted(self.output.items())),
            "limits": dict(sorted(self.limits.items())),
        }


def _typed(section: str, key: str, raw: str, schema: dict):
    if key not in schema:
        raise ConfigError(f"unknown key {key!r} in section [{section}]")
    try:
        return _PARSERS[schema[key]](raw)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad value for {key!r} in section [{section}]: {e}")


def parse_config(text: str, kind_hint: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate config text; every unknown key is an error."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"config parse error: {e}")

    kind = kind_hint
    if cp.has_section("experiment"):
        for key in cp["experiment"]:
            if key != "kind":
                raise ConfigError(f"unknown key {key!r} in section [experiment]")
        kind = cp.get("experiment", "kind", fallback=kind)
    if kind is None:
        raise ConfigError("missing experiment kind")
    kind = kind.strip()
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")

    run_schema = SCHEMAS[kind]["run"]
    cfg = ExperimentConfig(kind=kind)
    for section in cp.sections():
        if section == "experiment":
            continue
        if section == "system":
            for k, v in cp[section].items():
                cfg.system[k] = _typed(section, k, v, _SYSTEM_KEYS)
        elif section == "precision":
            for k, v in cp[section].items():
                cfg.precision[k] = _typed(section, k, v, _PRECISION_KEYS)
        elif section == "run":
            for k, v in cp[section].items():
                cfg.run[k] = _typed(section, k, v, run_schema)
        elif section == "output":
            for k, v in cp[section].items():
                cfg.output[k] = _typed(section, k, v, _OUTPUT_KEYS)
        elif section == "limits":
            for k, v in cp[section].items():
                cfg.limits[k] = _typed(section, k, v, _LIMITS_KEYS)
        else:
            raise ConfigError(f"unknown section [{section}]")
    cfg.system.setdefault("preset", DEFAULT_PRESET[kind])
    return cfg


def load_config(path, kind_hint: Optional[str] = None) -> ExperimentConfig:
    with open(path) as f:
        return parse_config(f.read(), kind_hint=kind_hint)
