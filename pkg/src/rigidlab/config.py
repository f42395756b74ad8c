"""Experiment configuration files.

Flat ``key = value`` lines (top of file or under ``[experiment]``) plus field
sections whose bodies use the term syntax of ``rigidlab.fields``::

    command = homoclinic
    matrix = 2 1 1 1
    n_min = 10
    n_max = 26

    [roof]
    cos 0 0 1.0
    cos 1 0 0.1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .fields import FiberWeight

COMMANDS = ("enumerate", "spectrum", "cocycle", "homoclinic", "bowen", "match", "pigeonhole", "verify")
FIELD_SECTIONS = ("roof", "roof2", "weight", "weight2", "test", "tilt", "potential")
METHODS = ("analytic", "finite_difference", "both")
POTENTIALS = ("zero", "unstable_jacobian", "constant", "weight")

_DEFAULT_FIELDS = {
    "roof": "cos 0 0 1.0\n",
    "weight": "cos 0 0 1.0\n",
    "test": "cos 1 0 1.0\n",
    "tilt": "",
    "potential": "",
}


@dataclass
class ExperimentConfig:
    command: str = ""
    matrix: tuple[int, int, int, int] = (2, 1, 1, 1)
    k_max: int = 3
    m: tuple[int, int] = (1, 0)
    n_min: int = 10
    n_max: int = 26
    delta: float = 1.0
    t_start: float = 1.0
    t_stop: float = 13.0
    t_step: float = 1.0
    potential_kind: str = "zero"
    potential_constant: float = 0.0
    tol: float | None = None
    method: str = "both"
    h0: float = 1e-3
    n: int = 2
    threads: int = 1
    out: str = "rigidlab_out"
    sections: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict, repr=False)

    def weight(self, name: str) -> FiberWeight:
        text = self.sections.get(name)
        if text is None and name.endswith("2"):
            return self.weight(name[:-1])
        if text is None:
            text = _DEFAULT_FIELDS[name]
        return FiberWeight.from_text(text)

    def resolved_tol(self) -> float:
        return 1e-9 * (1 + self.k_max) if self.tol is None else self.tol

    def echo(self) -> dict:
        """Fully resolved configuration with every default made explicit."""
        out = {}
        for f in fields(self):
            if f.name in ("sections", "lines"):
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        out["tol"] = self.resolved_tol()
        secs = {}
        for name in FIELD_SECTIONS:
            text = self.weight(name).to_text()
            secs[name] = [ln for ln in text.splitlines() if ln]
        out["fields"] = secs
        return out


_SCALARS = {f.name for f in fields(ExperimentConfig)} - {"sections", "lines", "potential_kind", "potential_constant"}
_KEYS = _SCALARS | {"potential"}


def _ints(value: str, count: int, key: str, line: int) -> tuple[int, ...]:
    parts = value.replace(",", " ").split()
    if len(parts) != count:
        raise ConfigError(f"{key} needs {count} integers", line)
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"{key} must be integers", line) from None


def _number(value: str, key: str, line: int, kind=float):
    try:
        v = kind(value)
    except ValueError:
        raise ConfigError(f"{key} must be a {'integer' if kind is int else 'number'}, got {value!r}", line) from None
    if kind is float and not math.isfinite(v):
        raise ConfigError(f"{key} must be finite", line)
    return v


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    section = "experiment"
    body: dict[str, list[str]] = {}
    starts: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip().lower()
            if section != "experiment" and section not in FIELD_SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            if section in starts:
                raise ConfigError(f"duplicate section [{section}]", lineno)
            if section != "experiment":
                starts[section] = lineno + 1
                body[section] = []
            continue
        if section != "experiment":
            body[section].append(raw)
            continue
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
        key, value = (s.strip() for s in stripped.split("=", 1))
        key = key.lower()
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in cfg.lines:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        cfg.lines[key] = lineno
        _assign(cfg, key, value, lineno)
    for name, lines in body.items():
        text_ = "\n".join(lines)
        FiberWeight.from_text(text_, starts[name])  # validates with file line numbers
        cfg.sections[name] = text_
    validate_config(cfg)
    return cfg


def _assign(cfg: ExperimentConfig, key: str, value: str, line: int) -> None:
    if key == "command":
        if value not in COMMANDS:
            raise ConfigError(f"unknown command {value!r}; expected one of {', '.join(COMMANDS)}", line)
        cfg.command = value
    elif key == "matrix":
        cfg.matrix = _ints(value, 4, key, line)
    elif key == "m":
        cfg.m = _ints(value, 2, key, line)
    elif key in ("k_max", "n_min", "n_max", "n", "threads"):
        setattr(cfg, key, _number(value, key, line, int))
    elif key in ("delta", "t_start", "t_stop", "t_step", "h0"):
        setattr(cfg, key, _number(value, key, line))
    elif key == "tol":
        cfg.tol = _number(value, key, line)
    elif key == "method":
        if value not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}", line)
        cfg.method = value
    elif key == "potential":
        parts = value.split()
        if not parts or parts[0] not in POTENTIALS:
            raise ConfigError(f"potential must be one of {', '.join(POTENTIALS)}", line)
        cfg.potential_kind = parts[0]
        if parts[0] == "constant":
            if len(parts) != 2:
                raise ConfigError("expected 'potential = constant <c>'", line)
            cfg.potential_constant = _number(parts[1], key, line)
        elif len(parts) != 1:
            raise ConfigError(f"unexpected arguments after {parts[0]!r}", line)
    elif key == "out":
        cfg.out = value


def validate_config(cfg: ExperimentConfig) -> None:
    def fail(msg: str, *keys: str):
        line = next((cfg.lines[k] for k in keys if k in cfg.lines), None)
        raise ConfigError(msg, line)

    if not cfg.command:
        fail("missing key 'command'")
    if not cfg.delta > 0:
        fail(f"delta must be positive, got {cfg.delta}", "delta")
    if not 1 <= cfg.k_max <= 24:
        fail("k_max must lie in [1, 24]", "k_max")
    if cfg.n_min < 2 or cfg.n_max < cfg.n_min:
        fail("need 2 <= n_min <= n_max", "n_min", "n_max")
    if cfg.t_start < 0 or cfg.t_stop < cfg.t_start or not cfg.t_step > 0:
        fail("need 0 <= t_start <= t_stop and t_step > 0", "t_start", "t_stop", "t_step")
    if cfg.tol is not None and not cfg.tol > 0:
        fail("tol must be positive", "tol")
    if not cfg.h0 > 0:
        fail("h0 must be positive", "h0")
    if cfg.threads < 1:
        fail("threads must be >= 1", "threads")
    if cfg.m == (0, 0):
        fail("m must be nonzero", "m")
    if cfg.potential_kind == "weight" and "potential" not in cfg.sections:
        fail("potential = weight needs a [potential] section", "potential")


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


__all__ = ["ExperimentConfig", "load_config", "parse_config"]
