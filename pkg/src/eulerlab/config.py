"""Run configuration: flat key=value files, environment defaults, and
the merge order defaults < file < command-line flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import ConfigError, ParamError
from .params import (STANDARD_R, STANDARD_T_FRACTION, STANDARD_Z,
                     SolutionParams, Variant, parse_variant)

OUTPUT_DIR_ENV = "EULERLAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "eulerlab_out"

_FLOAT_KEYS = ("a", "k", "t_star", "nu", "r_lo", "r_hi", "z_lo", "z_hi",
               "cfl", "t_end", "tol")
_INT_KEYS = ("nr", "nz", "seed")
_STR_KEYS = ("variant", "output_dir")
KNOWN_KEYS = frozenset(_FLOAT_KEYS + _INT_KEYS + _STR_KEYS)


def load_config_file(path: str) -> dict[str, str]:
    """Parse a flat key = value file; # starts a comment, blank lines
    are skipped, keys must be known and appear at most once."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    values: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
        values[key] = value
    return values


def _coerce(key: str, value) -> object:
    if isinstance(value, str):
        try:
            if key in _FLOAT_KEYS:
                return float(value)
            if key in _INT_KEYS:
                return int(value)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs.

    t_end is optional; consumers that march in time default it to half
    of t_star, samplers to the standard 0.8 fraction.
    """
    params: SolutionParams
    r_lo: float = STANDARD_R[0]
    r_hi: float = STANDARD_R[1]
    z_lo: float = STANDARD_Z[0]
    z_hi: float = STANDARD_Z[1]
    nr: int = 65
    nz: int = 65
    cfl: float = 0.9
    t_end: float | None = None
    tol: float = 1e-10
    seed: int = 20260819
    output_dir: str = field(default_factory=lambda: os.environ.get(
        OUTPUT_DIR_ENV, DEFAULT_OUTPUT_DIR))

    def __post_init__(self):
        if not (self.r_lo > 0.0 and self.r_hi > self.r_lo):
            raise ConfigError("need 0 < r_lo < r_hi")
        if not (self.z_hi > self.z_lo):
            raise ConfigError("need z_lo < z_hi")
        if self.nr < 8 or self.nz < 8:
            raise ConfigError("nr and nz must be at least 8")
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigError("cfl must lie in (0, 1]")
        if self.tol <= 0.0:
            raise ConfigError("tol must be positive")
        if self.t_end is not None and not (0.0 < self.t_end
                                           < self.params.t_star):
            raise ConfigError("t_end must lie in (0, t_star)")

    @property
    def sample_t_hi(self) -> float:
        if self.t_end is not None:
            return self.t_end
        return STANDARD_T_FRACTION * self.params.t_star

    @property
    def march_t_end(self) -> float:
        if self.t_end is not None:
            return self.t_end
        return 0.5 * self.params.t_star


def build_run_config(file_values: dict | None = None,
                     overrides: dict | None = None) -> RunConfig:
    """Merge config sources; overrides (CLI flags) win over the file,
    both win over built-in defaults. None-valued overrides are ignored."""
    merged: dict[str, object] = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value)

    try:
        params = SolutionParams(
            a=float(merged.get("a", 1.0)),
            k=float(merged.get("k", 1.0)),
            t_star=float(merged.get("t_star", 1.0)),
            nu=float(merged.get("nu", 0.0)),
            variant=parse_variant(merged.get("variant", Variant.EULER)),
        )
    except ParamError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solution parameters: {exc}")

    kwargs = {key: merged[key] for key in
              ("r_lo", "r_hi", "z_lo", "z_hi", "nr", "nz", "cfl",
               "t_end", "tol", "seed", "output_dir") if key in merged}
    return RunConfig(params=params, **kwargs)
