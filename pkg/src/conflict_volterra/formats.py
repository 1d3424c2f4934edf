"""Trajectory CSV and atlas JSONL serialization.

Both writers are pure: identical inputs give identical bytes.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .atlas import AtlasRecord
from .dynamics import NO_EVENTS, StepEvents, Trajectory
from .errors import IntegrityError

CSV_HEADER = "step,P1,P2,R1,R2,clamped,conflict_skipped"


def _real(x: float) -> str:
    return "%.17g" % x


def _clamped(events: StepEvents) -> str:
    return ";".join(f"{region}{i + 1}" for region, i in events.clamped)


def write_trajectory_csv(trajectory: Trajectory) -> bytes:
    """One row per state; ``clamped`` lists ``A1``/``B2``-style tags."""
    if len(trajectory) == 0:
        raise ValueError("cannot write an empty trajectory")
    if trajectory.states.shape[1] != 4:
        raise ValueError("trajectory CSV is defined for N = 2 regions")
    lines = [CSV_HEADER]
    for k, row in enumerate(trajectory.states):
        ev = trajectory.event(k)
        lines.append(
            ",".join(
                (
                    str(trajectory.step0 + k),
                    *(_real(float(v)) for v in row),
                    _clamped(ev),
                    "true" if ev.conflict_skipped else "false",
                )
            )
        )
    return ("\n".join(lines) + "\n").encode("ascii")


def read_trajectory_csv(data: bytes | str) -> Trajectory:
    text = data.decode("ascii") if isinstance(data, bytes) else data
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise ValueError("not a trajectory CSV (bad header)")
    rows, events, steps = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise ValueError(f"line {lineno}: expected 7 fields, got {len(parts)}")
        steps.append(int(parts[0]))
        rows.append([float(v) for v in parts[1:5]])
        clamped = tuple((tag[0], int(tag[1:]) - 1) for tag in parts[5].split(";") if tag)
        skipped = parts[6] == "true"
        events.append(StepEvents(clamped, skipped) if (clamped or skipped) else NO_EVENTS)
    if not rows:
        raise ValueError("trajectory CSV has no rows")
    # events[0] belongs to the initial state, which has none by construction
    return Trajectory(np.array(rows, dtype=float), events[1:], steps[0])


def write_atlas_jsonl(records: Sequence[AtlasRecord]) -> bytes:
    out = []
    prev = -1
    for rec in records:
        if rec.cell_index <= prev:
            raise IntegrityError(f"records not sorted by cell index at {rec.cell_index}")
        prev = rec.cell_index
        obj = {
            "cell": rec.cell_index,
            "alpha": rec.alpha,
            "seed": list(rec.seed),
            "class": rec.cls,
            "detail": rec.detail,
        }
        out.append(json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n")
    return "".join(out).encode("utf-8")


def read_atlas_jsonl(data: bytes | str) -> list[AtlasRecord]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    records = []
    for line in text.splitlines():
        if line.strip():
            obj = json.loads(line)
            records.append(AtlasRecord(obj["cell"], obj["alpha"], tuple(obj["seed"]), obj["class"], obj["detail"]))
    return records
