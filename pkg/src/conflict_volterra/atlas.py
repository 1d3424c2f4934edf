"""Parallel attractor sweeps over (alpha, seed) grids.

Every cell is an independent :func:`classify_attractor` call. Cells are
dealt round-robin to a process pool and merged back by cell index, so the
atlas does not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .analysis import ClassifyOptions, Cycle, Divergent, Extinct, FixedPoint, Undetermined, classify_attractor
from .dynamics import CoupledState, ModelParams
from .errors import IntegrityError

THREADS_ENV = "CONFLICT_VOLTERRA_THREADS"


@dataclass(frozen=True)
class AlphaRange:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("alpha range count must be >= 1")
        if self.lo > self.hi:
            raise ValueError("alpha range needs lo <= hi")

    def values(self) -> list[float]:
        if self.count == 1:
            return [float(self.lo)]
        return [float(a) for a in np.linspace(self.lo, self.hi, self.count)]


def seed_grid(
    p1_values: Sequence[float], p2_values: Sequence[float], R0: Sequence[float]
) -> list[CoupledState]:
    """Rectangular grid over ``(P1, P2)`` with region B fixed at ``R0``."""
    return [CoupledState((p1, p2), tuple(R0)) for p1 in p1_values for p2 in p2_values]


@dataclass(frozen=True)
class SweepSpec:
    params: ModelParams
    alpha_range: AlphaRange
    seeds: tuple[CoupledState, ...]
    classify_opts: ClassifyOptions = field(default_factory=ClassifyOptions)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if not self.seeds:
            raise ValueError("sweep needs at least one seed")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def total_cells(self) -> int:
        return self.alpha_range.count * len(self.seeds)

    def cell(self, index: int) -> tuple[float, CoupledState]:
        alphas = self.alpha_range.values()
        return alphas[index // len(self.seeds)], self.seeds[index % len(self.seeds)]


@dataclass(frozen=True)
class AtlasRecord:
    cell_index: int
    alpha: float
    seed: tuple[float, float, float, float]
    cls: str
    detail: dict[str, Any]


def _detail(result) -> dict[str, Any]:
    if isinstance(result, FixedPoint):
        return {"point": list(result.point)}
    if isinstance(result, Cycle):
        return {"lag": result.lag}
    if isinstance(result, Divergent):
        return {"step": result.step}
    if isinstance(result, Extinct):
        return {"region": result.region}
    return {"note": result.note}


def _run_cells(spec: SweepSpec, indices: Sequence[int]) -> list[AtlasRecord]:
    out = []
    for idx in indices:
        alpha, seed = spec.cell(idx)
        try:
            result = classify_attractor(seed, spec.params, alpha, spec.classify_opts)
        except Exception as exc:  # a bad cell must not poison the sweep
            result = Undetermined(f"{type(exc).__name__}: {exc}")
        out.append(AtlasRecord(idx, alpha, tuple(seed.P + seed.R), result.tag, _detail(result)))
    return out


def merge_partial(partials: Iterable[Sequence[AtlasRecord]]) -> list[AtlasRecord]:
    """Merge partial record lists into one list sorted by cell index."""
    merged = sorted((rec for part in partials for rec in part), key=lambda r: r.cell_index)
    for pos, rec in enumerate(merged):
        if rec.cell_index != pos:
            if pos > 0 and merged[pos - 1].cell_index == rec.cell_index:
                raise IntegrityError(f"duplicate cell index {rec.cell_index}")
            raise IntegrityError(f"missing cell index {pos}")
    return merged


def default_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return 1


def run_sweep(spec: SweepSpec) -> list[AtlasRecord]:
    total = spec.total_cells
    if spec.workers == 1 or total <= 1:
        return merge_partial([_run_cells(spec, range(total))])
    chunks = [list(range(w, total, spec.workers)) for w in range(spec.workers)]
    chunks = [c for c in chunks if c]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        partials = list(pool.map(_run_cells, [spec] * len(chunks), chunks))
    return merge_partial(partials)
