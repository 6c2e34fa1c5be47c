"""Config-file loading and validation for the command-line runner.

The format is flat `key = value` text: one assignment per line, `#` starts
a comment, keys use one dotted namespace per module (qubit.ec_ghz,
resonator.fr_ghz, ...). Every key has a documented default, so an empty
file is a valid config for any command. Diagnostics carry the offending
key and line number; the CLI maps ConfigError to exit code 2.

Value kinds are float, int, bool (true/false), and floats (a
comma-separated list). format_value is the inverse used when a resolved
config is echoed into output metadata, so an echoed config re-parses to
the same values exactly.
"""

import math
from dataclasses import dataclass
from pathlib import Path


class ConfigError(Exception):
    """Invalid config file or environment setting; maps to exit code 2."""


@dataclass(frozen=True)
class Field:
    """One config key: value kind, default, and an optional lower bound."""

    kind: str  # "float" | "int" | "bool" | "floats"
    default: object
    minimum: float = None
    exclusive: bool = False


@dataclass(frozen=True)
class RunConfig:
    """A validated command invocation: resolved key-value map plus source."""

    command: str
    values: dict
    source: str


def _qubit_fields(with_ej=True, with_ng=True):
    fields = {"qubit.ec_ghz": Field("float", 0.25, minimum=0.0, exclusive=True)}
    if with_ej:
        fields["qubit.ej_ghz"] = Field("float", 12.5, minimum=0.0)
    if with_ng:
        fields["qubit.ng"] = Field("float", 0.0)
    return fields


SCHEMAS = {
    "spectrum": {
        **_qubit_fields(),
        "sweep.start": Field("float", -2.0),
        "sweep.stop": Field("float", 2.0),
        "sweep.points": Field("int", 201, minimum=2),
        "spectrum.levels": Field("int", 3, minimum=1),
        "spectrum.normalize": Field("bool", True),
    },
    "flux-sweep": {
        **_qubit_fields(with_ej=False),
        "squid.ej_single_ghz": Field("float", 6.25, minimum=0.0),
        "sweep.start": Field("float", 0.0),
        "sweep.stop": Field("float", 0.5),
        "sweep.points": Field("int", 101, minimum=2),
    },
    "dispersion": {
        **_qubit_fields(with_ej=False),
        "dispersion.ratios": Field(
            "floats", (1.0, 5.0, 10.0, 50.0), minimum=0.0, exclusive=True
        ),
    },
    "rabi": {
        **_qubit_fields(),
        "resonator.fr_ghz": Field("float", None, minimum=0.0, exclusive=True),
        "coupling.g1_ghz": Field("float", 0.1, minimum=0.0),
        "system.n_transmon": Field("int", 3, minimum=2),
        "system.n_fock": Field("int", 8, minimum=2),
        "rabi.t_end_ns": Field("float", None, minimum=0.0, exclusive=True),
        "rabi.points": Field("int", 401, minimum=2),
    },
    "dispersive": {
        **_qubit_fields(),
        "resonator.fr_ghz": Field("float", 6.0, minimum=0.0, exclusive=True),
        "coupling.g1_ghz": Field("float", 0.1, minimum=0.0),
    },
    "readout": {
        **_qubit_fields(),
        "resonator.fr_ghz": Field("float", 6.0, minimum=0.0, exclusive=True),
        "resonator.kappa_mhz": Field("float", 1.0, minimum=0.0, exclusive=True),
        "coupling.g1_ghz": Field("float", 0.1, minimum=0.0),
        "readout.span_ghz": Field("float", 0.05, minimum=0.0, exclusive=True),
        "readout.points": Field("int", 401, minimum=2),
    },
    "pendulum": {
        **_qubit_fields(with_ng=False),
        "pendulum.phi0": Field("float", 0.3),
        "pendulum.t_end_ns": Field("float", 1.0, minimum=0.0, exclusive=True),
        "pendulum.dt_ns": Field("float", 2e-4, minimum=0.0, exclusive=True),
        "pendulum.length_m": Field("float", 1.0, minimum=0.0, exclusive=True),
        "pendulum.mass_kg": Field("float", 1.0, minimum=0.0, exclusive=True),
    },
}


def parse_config_text(text):
    """Raw `key = value` lines to {key: (value string, line number)}."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(
                f"line {lineno}: expected 'key = value', got {line!r}"
            )
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key before '='")
        if key in entries:
            raise ConfigError(
                f"line {lineno}: duplicate key {key} "
                f"(first set on line {entries[key][1]})"
            )
        entries[key] = (value, lineno)
    return entries


def _parse_scalar(kind, raw):
    if kind == "float":
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value
    if kind == "int":
        return int(raw)
    if kind == "bool":
        lowered = raw.lower()
        if lowered not in ("true", "false"):
            raise ValueError("must be true or false")
        return lowered == "true"
    raise AssertionError(f"unhandled kind {kind}")


def _check_bound(field, value):
    if field.minimum is None:
        return
    ok = value > field.minimum if field.exclusive else value >= field.minimum
    if not ok:
        op = ">" if field.exclusive else ">="
        raise ValueError(f"must be {op} {field.minimum:g}")


def _convert(key, field, raw, lineno):
    try:
        if field.kind == "floats":
            parts = [p.strip() for p in raw.split(",")]
            if not any(parts):
                raise ValueError("must be a comma-separated list of numbers")
            values = tuple(_parse_scalar("float", p) for p in parts)
            for v in values:
                _check_bound(field, v)
            return values
        value = _parse_scalar(field.kind, raw)
        _check_bound(field, value)
        return value
    except ValueError as exc:
        reason = str(exc)
        if "could not convert" in reason or "invalid literal" in reason:
            reason = f"expected a {field.kind} value, got {raw!r}"
        raise ConfigError(f"line {lineno}: {key} {reason}") from None


def resolve(command, entries):
    """Typed, defaulted value map for a command; rejects unknown keys."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = SCHEMAS[command]
    for key, (_, lineno) in entries.items():
        if key not in schema:
            known = ", ".join(sorted(schema))
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} for command "
                f"{command} (known keys: {known})"
            )
    values = {}
    for key, field in schema.items():
        if key in entries:
            raw, lineno = entries[key]
            values[key] = _convert(key, field, raw, lineno)
        else:
            values[key] = field.default
    return values


def load_config(path, command):
    """Read, parse, and validate a config file for one command."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values = resolve(command, parse_config_text(text))
    if command == "rabi":
        if values["rabi.t_end_ns"] is None and values["coupling.g1_ghz"] == 0.0:
            raise ConfigError(
                "rabi.t_end_ns is required when coupling.g1_ghz = 0 "
                "(no swap period to derive a duration from)"
            )
    return RunConfig(command=command, values=values, source=str(path))


def format_value(value):
    """Inverse of parsing: render a resolved value as config-file text."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)
