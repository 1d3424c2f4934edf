"""JSON run configuration.

Example::

    {
      "params": {"a": 0.2, "b": 0.006, "c": 0.002, "d": 0.008, "e": 0.002, "f": 0},
      "alpha": 0.01,
      "P0": [3, 5],
      "R0": [7, 10],
      "steps": 70000
    }

Optional keys: ``transient`` (default ``steps // 2``), ``tolerances``
(``massEps``, ``zEps``, ``tolFixed``, ``tolCycle``, ``newtonTol``),
``outputs`` (``trajectory``, ``svg``, ``atlas``), ``sweep``,
``bifurcation`` and ``conflict`` sections for the matching subcommands.
Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .dynamics import ModelParams
from .errors import ConfigError

DEFAULT_TOLERANCES = {
    "massEps": 1e-12,
    "zEps": 1e-12,
    "tolFixed": 1e-8,
    "tolCycle": 1e-5,
    "newtonTol": 1e-10,
}
OUTPUT_KEYS = ("trajectory", "svg", "atlas")


@dataclass(frozen=True)
class SweepSection:
    alpha_lo: float
    alpha_hi: float
    count: int
    seeds: tuple[tuple[float, ...], ...] = ()
    grid: Optional[dict[str, tuple[float, ...]]] = None


@dataclass(frozen=True)
class BifurcationSection:
    alpha_lo: float
    alpha_hi: float
    resolution: float


@dataclass(frozen=True)
class ConflictSection:
    p: tuple[float, ...]
    r: tuple[float, ...]
    tol: float = 1e-12
    max_iter: int = 1_000_000


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    alpha: float
    P0: tuple[float, ...]
    R0: tuple[float, ...]
    steps: int
    transient: int
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    outputs: dict[str, str] = field(default_factory=dict)
    sweep: Optional[SweepSection] = None
    bifurcation: Optional[BifurcationSection] = None
    conflict: Optional[ConflictSection] = None

    def with_overrides(self, alpha=None, steps=None, tol=None) -> "RunConfig":
        cfg = self
        if alpha is not None:
            cfg = replace(cfg, alpha=_alpha(alpha, "alpha"))
        if steps is not None:
            steps = _int(steps, "steps", minimum=1)
            cfg = replace(cfg, steps=steps, transient=min(cfg.transient, steps - 1))
        if tol is not None:
            cfg = replace(cfg, tolerances={**cfg.tolerances, "newtonTol": _positive(tol, "tolerances.newtonTol")})
        return cfg

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "params": self.params.as_dict(),
            "alpha": self.alpha,
            "P0": list(self.P0),
            "R0": list(self.R0),
            "steps": self.steps,
            "transient": self.transient,
            "tolerances": dict(self.tolerances),
        }
        if self.outputs:
            doc["outputs"] = dict(self.outputs)
        if self.sweep is not None:
            sw: dict[str, Any] = {"alphaLo": self.sweep.alpha_lo, "alphaHi": self.sweep.alpha_hi, "count": self.sweep.count}
            if self.sweep.seeds:
                sw["seeds"] = [list(s) for s in self.sweep.seeds]
            if self.sweep.grid is not None:
                sw["grid"] = {k: list(v) for k, v in self.sweep.grid.items()}
            doc["sweep"] = sw
        if self.bifurcation is not None:
            b = self.bifurcation
            doc["bifurcation"] = {"alphaLo": b.alpha_lo, "alphaHi": b.alpha_hi, "resolution": b.resolution}
        if self.conflict is not None:
            c = self.conflict
            doc["conflict"] = {"p": list(c.p), "r": list(c.r), "tol": c.tol, "maxIter": c.max_iter}
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# -- field validators -------------------------------------------------------


def _number(value, key) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(key, "must be finite")
    return value


def _positive(value, key) -> float:
    value = _number(value, key)
    if value <= 0:
        raise ConfigError(key, f"must be > 0, got {value!r}")
    return value


def _alpha(value, key) -> float:
    value = _number(value, key)
    if not -1.0 <= value <= 1.0:
        raise ConfigError(key, f"must satisfy |alpha| <= 1, got {value!r}")
    return value


def _int(value, key, minimum=0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {type(value).__name__}")
    if value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return value


def _vector(value, key, length=None) -> tuple[float, ...]:
    if not isinstance(value, list):
        raise ConfigError(key, "expected a list of numbers")
    out = tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(value))
    if length is not None and len(out) != length:
        raise ConfigError(key, f"expected {length} entries, got {len(out)}")
    return out


def _object(value, key, allowed, required=()) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(key, "expected an object")
    for k in value:
        if k not in allowed:
            raise ConfigError(f"{key}.{k}" if key else k, "unknown key")
    for k in required:
        if k not in value:
            raise ConfigError(f"{key}.{k}" if key else k, "missing required key")
    return value


def _populations(value, key) -> tuple[float, ...]:
    out = _vector(value, key)
    if len(out) < 2:
        raise ConfigError(key, "needs at least 2 populations")
    if any(v < 0 for v in out):
        raise ConfigError(key, "populations must be >= 0")
    return out


# -- top level ----------------------------------------------------------------

TOP_KEYS = (
    "params", "alpha", "P0", "R0", "steps", "transient", "tolerances", "outputs", "sweep", "bifurcation", "conflict",
)


def config_from_dict(doc: Any) -> RunConfig:
    doc = _object(doc, "", TOP_KEYS, required=("params", "alpha", "P0", "R0", "steps"))

    raw = _object(doc["params"], "params", tuple("abcdef"), required=tuple("abcdef"))
    values = {}
    for k in "abcdef":
        values[k] = _number(raw[k], f"params.{k}")
        if values[k] < 0:
            raise ConfigError(f"params.{k}", "must be >= 0")
    params = ModelParams(**values)

    alpha = _alpha(doc["alpha"], "alpha")
    P0 = _populations(doc["P0"], "P0")
    R0 = _populations(doc["R0"], "R0")
    if len(P0) != len(R0):
        raise ConfigError("R0", f"length {len(R0)} differs from P0 length {len(P0)}")
    steps = _int(doc["steps"], "steps", minimum=1)
    transient = _int(doc.get("transient", steps // 2), "transient")
    if transient >= steps:
        raise ConfigError("transient", "must be smaller than steps")

    tolerances = dict(DEFAULT_TOLERANCES)
    for k, v in _object(doc.get("tolerances", {}), "tolerances", DEFAULT_TOLERANCES).items():
        tolerances[k] = _positive(v, f"tolerances.{k}")

    outputs = {}
    for k, v in _object(doc.get("outputs", {}), "outputs", OUTPUT_KEYS).items():
        if not isinstance(v, str) or not v:
            raise ConfigError(f"outputs.{k}", "expected a non-empty path string")
        outputs[k] = v

    return RunConfig(
        params=params,
        alpha=alpha,
        P0=P0,
        R0=R0,
        steps=steps,
        transient=transient,
        tolerances=tolerances,
        outputs=outputs,
        sweep=_sweep(doc["sweep"]) if "sweep" in doc else None,
        bifurcation=_bifurcation(doc["bifurcation"]) if "bifurcation" in doc else None,
        conflict=_conflict(doc["conflict"]) if "conflict" in doc else None,
    )


def _sweep(raw) -> SweepSection:
    raw = _object(raw, "sweep", ("alphaLo", "alphaHi", "count", "seeds", "grid"), required=("alphaLo", "alphaHi", "count"))
    lo = _alpha(raw["alphaLo"], "sweep.alphaLo")
    hi = _alpha(raw["alphaHi"], "sweep.alphaHi")
    if lo > hi:
        raise ConfigError("sweep.alphaHi", "must be >= alphaLo")
    count = _int(raw["count"], "sweep.count", minimum=1)
    seeds = ()
    if "seeds" in raw:
        if not isinstance(raw["seeds"], list) or not raw["seeds"]:
            raise ConfigError("sweep.seeds", "expected a non-empty list of 4-vectors")
        seeds = tuple(_vector(s, f"sweep.seeds[{i}]", 4) for i, s in enumerate(raw["seeds"]))
        for i, s in enumerate(seeds):
            if min(s) < 0:
                raise ConfigError(f"sweep.seeds[{i}]", "populations must be >= 0")
    grid = None
    if "grid" in raw:
        g = _object(raw["grid"], "sweep.grid", ("P1", "P2", "R0"), required=("P1", "P2", "R0"))
        grid = {k: _vector(g[k], f"sweep.grid.{k}") for k in ("P1", "P2", "R0")}
        if len(grid["R0"]) != 2:
            raise ConfigError("sweep.grid.R0", "expected 2 entries")
        if not grid["P1"] or not grid["P2"]:
            raise ConfigError("sweep.grid", "grid axes must be non-empty")
    return SweepSection(lo, hi, count, seeds, grid)


def _bifurcation(raw) -> BifurcationSection:
    raw = _object(raw, "bifurcation", ("alphaLo", "alphaHi", "resolution"), required=("alphaLo", "alphaHi", "resolution"))
    lo = _alpha(raw["alphaLo"], "bifurcation.alphaLo")
    hi = _alpha(raw["alphaHi"], "bifurcation.alphaHi")
    if lo >= hi:
        raise ConfigError("bifurcation.alphaHi", "must exceed alphaLo")
    return BifurcationSection(lo, hi, _positive(raw["resolution"], "bifurcation.resolution"))


def _conflict(raw) -> ConflictSection:
    raw = _object(raw, "conflict", ("p", "r", "tol", "maxIter"), required=("p", "r"))
    p = _vector(raw["p"], "conflict.p")
    r = _vector(raw["r"], "conflict.r", len(p))
    tol = _positive(raw.get("tol", 1e-12), "conflict.tol")
    max_iter = _int(raw.get("maxIter", 1_000_000), "conflict.maxIter", minimum=1)
    return ConflictSection(p, r, tol, max_iter)


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"malformed JSON: {exc}") from None
    return config_from_dict(doc)
