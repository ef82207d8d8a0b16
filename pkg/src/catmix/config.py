"""Experiment configuration: TOML in, validated dataclass out, TOML back.

The file is flat sections: [map] (matrix + shear list), [field] (k0, square
size), [run] (kappa, tol, seed), [params] (experiment-specific knobs).  The
round trip parse(serialize(cfg)) is field-for-field identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .torusmaps import IntMatrix2, PerturbedCatMap, ShearStep

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "serialize_config",
           "load_config", "DEFAULTS"]


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    matrix: tuple[int, int, int, int] = (2, 1, 1, 1)
    shears: tuple[dict, ...] = ()
    k0: tuple[int, int] = (1, 0)
    max_mode: int = 128
    grid_size: int | None = None
    kappa: float = 1e-3
    tol: float = 1e-6
    seed: int = 0
    params: dict = dc_field(default_factory=dict)

    def map_object(self) -> PerturbedCatMap:
        m = IntMatrix2(*self.matrix)
        try:
            shears = tuple(ShearStep(s["axis"], float(s["amplitude"]),
                                     int(s.get("frequency", 1))) for s in self.shears)
            return PerturbedCatMap(m, shears)
        except (KeyError, ValueError) as e:
            raise ConfigError(str(e)) from e

    def param(self, name, default=None):
        return self.params.get(name, default)


DEFAULTS = ExperimentConfig()


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"TOML parse failure: {e}") from e
    mp = raw.get("map", {})
    fd = raw.get("field", {})
    rn = raw.get("run", {})
    params = dict(raw.get("params", {}))
    try:
        matrix = tuple(int(v) for v in mp.get("matrix", DEFAULTS.matrix))
        if len(matrix) != 4:
            raise ConfigError("map.matrix must have 4 integer entries")
        shears = tuple(dict(s) for s in mp.get("shears", ()))
        k0 = tuple(int(v) for v in fd.get("k0", DEFAULTS.k0))
        if len(k0) != 2:
            raise ConfigError("field.k0 must have 2 integer entries")
        cfg = ExperimentConfig(
            matrix=matrix,
            shears=shears,
            k0=k0,
            max_mode=int(fd.get("max_mode", DEFAULTS.max_mode)),
            grid_size=int(fd["grid_size"]) if "grid_size" in fd else None,
            kappa=float(rn.get("kappa", DEFAULTS.kappa)),
            tol=float(rn.get("tol", DEFAULTS.tol)),
            seed=int(rn.get("seed", DEFAULTS.seed)),
            params=params,
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad config value: {e}") from e
    if cfg.max_mode < 1:
        raise ConfigError("field.max_mode must be positive")
    if cfg.tol <= 0:
        raise ConfigError("run.tol must be positive")
    cfg.map_object()  # surface matrix/shear problems now
    return cfg


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k} = {_fmt(x)}" for k, x in v.items()) + "}"
    raise ConfigError(f"cannot serialize config value {v!r}")


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = ["[map]", f"matrix = {_fmt(list(cfg.matrix))}"]
    for s in cfg.shears:
        lines += ["", "[[map.shears]]",
                  f"axis = {_fmt(s['axis'])}",
                  f"amplitude = {_fmt(float(s['amplitude']))}",
                  f"frequency = {_fmt(int(s.get('frequency', 1)))}"]
    lines += ["", "[field]", f"k0 = {_fmt(list(cfg.k0))}", f"max_mode = {cfg.max_mode}"]
    if cfg.grid_size is not None:
        lines.append(f"grid_size = {cfg.grid_size}")
    lines += ["", "[run]", f"kappa = {_fmt(cfg.kappa)}", f"tol = {_fmt(cfg.tol)}",
              f"seed = {cfg.seed}"]
    if cfg.params:
        lines += ["", "[params]"]
        for k in sorted(cfg.params):
            lines.append(f"{k} = {_fmt(cfg.params[k])}")
    return "\n".join(lines) + "\n"


def load_config(path: "Path | str") -> ExperimentConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text())
