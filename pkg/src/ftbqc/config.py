"""Run configuration: ``key = value`` files with ``#`` comments."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ftbqc.channel import ChannelParams, DecoyParams
from ftbqc.resources import MAX_LEVEL, ResourceParams

EXPERIMENTS = ("prepare", "correct", "run", "sweep-distance", "sweep-level")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (a usage error)."""


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def distance_range(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive grid ``start, start+step, ..., stop``."""
    if step <= 0 or stop < start:
        raise ConfigError("distance range needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


@dataclass(frozen=True)
class RunConfig:
    # fibre and detector
    alpha: float = 0.2
    t_s: float = 0.45
    eta_s: float = 0.1
    Y0: float = 0.0
    # decoy source
    mu: float = 0.6
    v1: float = 0.125
    v2: float = 0.0
    p_mu: float = 0.9
    p_v1: float = 0.05
    p_v2: float = 0.05
    # protocol
    S: float = 1000
    epsilon: float = 1e-10
    e0: float = 0.01
    C: float = 1774
    f: float = 1e6
    # experiment
    experiment: str | None = None
    distances: tuple[float, ...] = field(default_factory=lambda: distance_range(0, 100, 5))
    level_distances: tuple[float, ...] = (25.0, 50.0, 100.0)
    levels: tuple[int, ...] = tuple(range(MAX_LEVEL + 1))
    seed: int = 0
    samples: int = 10_000
    level: int = 0
    workers: int = 1
    out: str | None = None

    def __post_init__(self) -> None:
        if self.experiment is not None and self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not self.distances or not self.level_distances or not self.levels:
            raise ConfigError("distance and level grids must be non-empty")
        if any(L < 0 for L in self.distances + self.level_distances):
            raise ConfigError("distances must be non-negative")
        if any(not 0 <= n <= MAX_LEVEL for n in self.levels + (self.level,)):
            raise ConfigError(f"levels must lie in 0..{MAX_LEVEL}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.samples < 1 or self.workers < 1:
            raise ConfigError("samples and workers must be positive")
        if not 0 <= self.e0 < 1:
            raise ConfigError("e0 must lie in [0, 1)")
        try:
            self.channel()
            self.decoy()
            if self.e0 > 0:
                self.resources()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def channel(self, L: float = 0.0) -> ChannelParams:
        return ChannelParams(self.alpha, L, self.t_s, self.eta_s, self.Y0)

    def decoy(self) -> DecoyParams:
        return DecoyParams(self.mu, self.v1, self.v2, self.p_mu, self.p_v1, self.p_v2)

    def resources(self) -> ResourceParams:
        return ResourceParams(self.e0, self.S, self.C, self.f, self.epsilon, self.levels)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


_CASTS = {
    "distances": _floats,
    "level_distances": _floats,
    "levels": _ints,
    "seed": int,
    "samples": int,
    "level": int,
    "workers": int,
    "experiment": str,
    "out": str,
}


def parse_config(text: str) -> dict:
    """``key = value`` pairs as typed values; unknown keys are rejected."""
    known = {f.name for f in dataclasses.fields(RunConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key == "distance_range":
            try:
                values["distances"] = distance_range(*_floats(value))
            except TypeError as exc:
                raise ConfigError(f"line {lineno}: distance_range needs start, stop, step") from exc
            continue
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CASTS.get(key, float)(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return values


def load_config(path: str | Path | None = None, overrides: Mapping | None = None) -> RunConfig:
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        values = parse_config(text)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
