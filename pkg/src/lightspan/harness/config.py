"""Experiment configuration: key-value files, flag overrides, validation.

A config file holds one ``key = value`` per line; ``#`` starts a comment.
Flags given on the command line replace file values key by key. Unknown
keys are rejected before anything is written.

Recognised keys::

    schema_version  1
    command         generate | verify | sweep | montecarlo | compare
    k, c            integers (k >= 2, c >= 0)
    epsilon         comma-separated unit fractions, e.g. 1/8, 1/16
    n_target        comma-separated integers
    base            whitespace- or ';'-separated specs name:params
    seeds           e.g. 1,2,7 or 1-20 (empty means no seeds)
    constant.NAME   float knob, see KNOWN_CONSTANTS
    trials, chunk   Monte Carlo sample count and batch size
    out, format, workers, instance, name
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, NamedTuple, Optional

from ..construction import DEFAULT_CONSTANTS, as_epsilon
from ..errors import ConfigError, LightspanError

SCHEMA_VERSION = 1
OUT_ENV = "LIGHTSPAN_OUT"
DEFAULT_OUT = "lightspan-out"
COMMANDS = ("generate", "verify", "sweep", "montecarlo", "compare")
FORMATS = ("csv", "json")

# construction knobs plus harness-only ones
KNOWN_CONSTANTS = dict(DEFAULT_CONSTANTS)
KNOWN_CONSTANTS.update(
    {
        "lightness_constant": 1.0,  # scale of predicted_lightness
        "collapse_below": 0.5,  # surviving fraction under which a row is flagged
        "bound_constant": 8.0,  # per-edge factor of the Monte Carlo probability bound
    }
)

KEYS = (
    "schema_version", "command", "k", "c", "epsilon", "n_target", "base", "seeds",
    "trials", "chunk", "out", "format", "workers", "instance", "name",
)

BASE_PARAMS = {
    "biclique": ("side",),
    "pg2": ("q",),
    "random-alteration": ("n", "kappa", "density_exponent"),
    "cycle": ("length",),
}


class BaseSpec(NamedTuple):
    name: str
    params: tuple  # sorted (key, value-string) pairs

    def __str__(self) -> str:
        order = BASE_PARAMS[self.name]
        d = dict(self.params)
        body = ",".join(f"{k}={d[k]}" for k in order if k in d)
        extra = ",".join(f"{k}={v}" for k, v in self.params if k not in order)
        return f"{self.name}:{','.join(x for x in (body, extra) if x)}"

    @property
    def kwargs(self) -> dict:
        return dict(self.params)


def parse_base(text: str) -> BaseSpec:
    name, _, rest = text.strip().partition(":")
    if name not in BASE_PARAMS:
        raise ConfigError(f"unknown base generator {name!r} (known: {', '.join(BASE_PARAMS)})")
    names = BASE_PARAMS[name]
    params = {}
    for i, tok in enumerate(t for t in rest.split(",") if t.strip()):
        key, eq, val = tok.partition("=")
        if not eq:
            if i >= len(names):
                raise ConfigError(f"too many positional parameters for base {name!r}")
            key, val = names[i], tok
        key = key.strip()
        if key not in names and key != "seed":
            raise ConfigError(f"base {name!r} has no parameter {key!r}")
        params[key] = val.strip()
    return BaseSpec(name, tuple(sorted(params.items())))


def parse_seeds(text: str) -> tuple[int, ...]:
    seeds = []
    for tok in re.split(r"[,\s]+", text.strip()):
        if not tok:
            continue
        m = re.fullmatch(r"(\d+)-(\d+)", tok)
        try:
            if m:
                a, b = int(m.group(1)), int(m.group(2))
                if b < a:
                    raise ConfigError(f"empty seed range {tok!r}")
                seeds.extend(range(a, b + 1))
            else:
                seeds.append(int(tok))
                if seeds[-1] < 0:
                    raise ValueError
        except ValueError:
            raise ConfigError(f"bad seed {tok!r}") from None
    return tuple(seeds)


def _split_list(text: str) -> list[str]:
    return [t for t in re.split(r"[,\s]+", text.strip()) if t]


@dataclass(frozen=True)
class ExperimentConfig:
    command: Optional[str] = None
    k: int = 2
    c: int = 0
    epsilons: tuple = ()
    n_targets: tuple = ()
    bases: tuple = ()
    seeds: tuple = (1,)
    constants: Mapping[str, float] = field(default_factory=lambda: dict(KNOWN_CONSTANTS))
    trials: int = 100_000
    chunk: int = 1_000_000
    out: Optional[str] = None
    formats: tuple = FORMATS
    workers: int = 1
    instance: Optional[str] = None
    name: Optional[str] = None
    schema_version: int = SCHEMA_VERSION
    explicit: frozenset = field(default=frozenset(), compare=False)

    @property
    def out_dir(self) -> Path:
        return Path(self.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)

    def construction_constants(self) -> dict:
        return {k: self.constants[k] for k in DEFAULT_CONSTANTS}

    def echo(self) -> dict:
        """Everything that determines results; paths and worker count are left out."""
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "k": self.k,
            "c": self.c,
            "epsilon": [str(e) for e in self.epsilons],
            "n_target": list(self.n_targets),
            "base": [str(b) for b in self.bases],
            "seeds": list(self.seeds),
            "constants": {k: self.constants[k] for k in sorted(self.constants)},
            "trials": self.trials,
            "chunk": self.chunk,
        }


def parse_config_text(text: str) -> dict:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        _check_key(key)
        raw[key] = value.strip()
    return raw


def _check_key(key: str) -> None:
    if key.startswith("constant."):
        name = key[len("constant."):]
        if name not in KNOWN_CONSTANTS:
            raise ConfigError(f"unknown config key {key!r}")
    elif key not in KEYS:
        raise ConfigError(f"unknown config key {key!r}")


def _int(raw, key, lo=None) -> int:
    try:
        v = int(raw[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw[key]!r}") from None
    if lo is not None and v < lo:
        raise ConfigError(f"{key} must be >= {lo}, got {v}")
    return v


def build_config(raw: Mapping[str, str]) -> ExperimentConfig:
    """Validate a flat key -> string mapping into an :class:`ExperimentConfig`."""
    for key in raw:
        _check_key(key)
    kw: dict = {"explicit": frozenset(raw)}
    if "schema_version" in raw:
        v = _int(raw, "schema_version")
        if v != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {v}")
    if "command" in raw:
        if raw["command"] not in COMMANDS:
            raise ConfigError(f"unknown command {raw['command']!r}")
        kw["command"] = raw["command"]
    if "k" in raw:
        kw["k"] = _int(raw, "k", lo=2)
    if "c" in raw:
        kw["c"] = _int(raw, "c", lo=0)
    if "epsilon" in raw:
        try:
            kw["epsilons"] = tuple(as_epsilon(t) for t in _split_list(raw["epsilon"]))
        except (LightspanError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"epsilon: {exc}") from None
    if "n_target" in raw:
        try:
            kw["n_targets"] = tuple(int(t) for t in _split_list(raw["n_target"]))
        except ValueError:
            raise ConfigError(f"n_target must be integers, got {raw['n_target']!r}") from None
        if any(t < 1 for t in kw["n_targets"]):
            raise ConfigError("n_target must be positive")
    if "base" in raw:
        kw["bases"] = tuple(parse_base(t) for t in re.split(r"[;\s]+", raw["base"].strip()) if t)
    if "seeds" in raw:
        kw["seeds"] = parse_seeds(raw["seeds"])
    constants = dict(KNOWN_CONSTANTS)
    for key, val in raw.items():
        if key.startswith("constant."):
            try:
                constants[key[len("constant."):]] = float(val)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {val!r}") from None
    kw["constants"] = constants
    for key in ("trials", "chunk", "workers"):
        if key in raw:
            kw[key] = _int(raw, key, lo=1)
    if "format" in raw:
        fmts = tuple(_split_list(raw["format"]))
        bad = [f for f in fmts if f not in FORMATS]
        if bad or not fmts:
            raise ConfigError(f"format must be csv or json, got {raw['format']!r}")
        kw["formats"] = fmts
    for key in ("out", "instance", "name"):
        if key in raw:
            kw[key] = raw[key]
    return ExperimentConfig(**kw)


def load_config(path=None, overrides: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    raw: dict[str, str] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        raw.update(parse_config_text(text))
    raw.update(overrides or {})
    return build_config(raw)


def epsilon_text(eps: Fraction) -> str:
    return f"{eps.numerator}/{eps.denominator}"
