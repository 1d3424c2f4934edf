"""Two discrete Lotka-Volterra regions coupled by conflict composition.

One step of the composed map ``F`` runs four operations in a fixed order:

1. ``lv_step`` inside each region (prey ``P1``, predator ``P2``),
2. ``normalize`` both regions to stochastic vectors,
3. ``conflict_compose`` the two stochastic vectors,
4. ``denormalize`` with the region masses measured after step 1.

Populations are plain tuples of floats. ``simulate`` runs an unrolled
scalar loop for the two-species case that performs the same floating-point
operations, in the same order, as ``step_F``; the two are bitwise identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import DegenerateNormalizerError, DivergenceError, ExtinctRegionError

MASS_EPS = 1e-12
Z_EPS = 1e-12
STOCHASTIC_TOL = 1e-12

REGION_A = "A"
REGION_B = "B"


@dataclass(frozen=True)
class ModelParams:
    """Per-step Lotka-Volterra rates shared by both regions.

    ``a`` prey growth, ``b`` predation, ``c`` prey self-limitation,
    ``d`` predator death, ``e`` predator gain, ``f`` predator self-limitation.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "e", "f"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"parameter {name} must be finite and >= 0, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def standard(cls) -> "ModelParams":
        """The parameter set used throughout the reference experiments."""
        return cls(a=0.2, b=0.006, c=0.002, d=0.008, e=0.002, f=0.0)

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("a", "b", "c", "d", "e", "f")}


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (-1.0 <= alpha <= 1.0):
        raise ValueError(f"alpha must lie in [-1, 1], got {alpha!r}")
    return alpha


def _region(values: Sequence[float], name: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if len(out) < 2:
        raise ValueError(f"region {name} needs at least 2 populations, got {len(out)}")
    for v in out:
        if not math.isfinite(v) or v < 0:
            raise ValueError(f"region {name} populations must be finite and >= 0, got {out}")
    return out


@dataclass(frozen=True)
class CoupledState:
    """Populations of region A (``P``) and region B (``R``) at time ``step``."""

    P: tuple[float, ...]
    R: tuple[float, ...]
    step: int = 0

    def __post_init__(self):
        P = _region(self.P, REGION_A)
        R = _region(self.R, REGION_B)
        if len(P) != len(R):
            raise ValueError(f"regions differ in length: {len(P)} != {len(R)}")
        if int(self.step) < 0:
            raise ValueError("step must be nonnegative")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "step", int(self.step))

    @property
    def n(self) -> int:
        return len(self.P)

    def as_vector(self) -> np.ndarray:
        return np.array(self.P + self.R, dtype=float)

    @classmethod
    def from_vector(cls, x: Sequence[float], step: int = 0) -> "CoupledState":
        x = [float(v) for v in x]
        if len(x) % 2:
            raise ValueError("state vector must have even length")
        half = len(x) // 2
        return cls(tuple(x[:half]), tuple(x[half:]), step)


def as_stochastic(coords: Sequence[float], tol: float = STOCHASTIC_TOL) -> tuple[float, ...]:
    """Validate ``coords`` as a stochastic vector and return it as a tuple."""
    v = tuple(float(c) for c in coords)
    if len(v) < 2:
        raise ValueError("stochastic vector needs at least 2 coordinates")
    for c in v:
        # iterates can miss [0, 1] by an ulp or so
        if not (-tol <= c <= 1.0 + tol):
            raise ValueError(f"stochastic coordinates must lie in [0, 1], got {v}")
    if abs(math.fsum(v) - 1.0) > tol:
        raise ValueError(f"stochastic vector must sum to 1, got sum {math.fsum(v)!r}")
    return v


@dataclass(frozen=True)
class NormalizedPair:
    p: tuple[float, ...]
    r: tuple[float, ...]
    mass_p: float
    mass_r: float

    def __post_init__(self):
        if not (self.mass_p > 0 and self.mass_r > 0):
            raise ValueError("normalized pair needs positive region masses")


@dataclass(frozen=True)
class ConflictStepInfo:
    z: float
    inner: float


@dataclass(frozen=True)
class StepEvents:
    """What happened during one step of ``F`` besides the arithmetic."""

    clamped: tuple[tuple[str, int], ...] = ()
    conflict_skipped: bool = False


NO_EVENTS = StepEvents()


def lv_step(params: ModelParams, s: Sequence[float]) -> tuple[tuple[float, float], tuple[int, ...]]:
    """Advance one region by one discrete Lotka-Volterra step.

    Returns the new ``(prey, predator)`` pair and the zero-based indices that
    went negative and were clamped to 0.

    >>> lv_step(ModelParams.standard(), (4.0, 32.0))[0]
    (4.0, 32.0)
    """
    if len(s) != 2:
        raise ValueError(f"lv_step is defined for prey-predator pairs, got N={len(s)}")
    x1, x2 = float(s[0]), float(s[1])
    n1 = x1 + x1 * (params.a - params.b * x2 - params.c * x1)
    n2 = x2 + x2 * (-params.d + params.e * x1 - params.f * x2)
    if not (math.isfinite(n1) and math.isfinite(n2)):
        raise DivergenceError(0, (n1, n2))
    clamped = []
    if n1 < 0.0:
        n1 = 0.0
        clamped.append(0)
    if n2 < 0.0:
        n2 = 0.0
        clamped.append(1)
    return (n1, n2), tuple(clamped)


def normalize(state: CoupledState, mass_eps: float = MASS_EPS) -> NormalizedPair:
    mass_p = sum(state.P)
    mass_r = sum(state.R)
    if mass_p <= mass_eps:
        raise ExtinctRegionError(REGION_A, mass_p)
    if mass_r <= mass_eps:
        raise ExtinctRegionError(REGION_B, mass_r)
    p = tuple(x / mass_p for x in state.P)
    r = tuple(x / mass_r for x in state.R)
    return NormalizedPair(p, r, mass_p, mass_r)


def conflict_compose(
    p: Sequence[float], r: Sequence[float], alpha: float, z_eps: float = Z_EPS
) -> tuple[tuple[float, ...], tuple[float, ...], ConflictStepInfo]:
    """One round of conflict redistribution between stochastic vectors.

    ``alpha > 0`` pushes the vectors apart (repulsion), ``alpha < 0`` pulls
    them together. ``alpha == 0`` returns the inputs untouched.
    """
    p = as_stochastic(p)
    r = as_stochastic(r)
    if len(p) != len(r):
        raise ValueError("conflict_compose needs vectors of equal length")
    alpha = check_alpha(alpha)
    inner = sum(pi * ri for pi, ri in zip(p, r))
    z = 1.0 - alpha * inner
    if abs(z) <= z_eps:
        raise DegenerateNormalizerError(z)
    p_new = tuple(pi * (1.0 - alpha * ri) / z for pi, ri in zip(p, r))
    r_new = tuple(ri * (1.0 - alpha * pi) / z for pi, ri in zip(p, r))
    return p_new, r_new, ConflictStepInfo(z=z, inner=inner)


def denormalize(pair: NormalizedPair, step: int = 0) -> CoupledState:
    P = tuple(x * pair.mass_p for x in pair.p)
    R = tuple(x * pair.mass_r for x in pair.r)
    return CoupledState(P, R, step)


def step_F(
    state: CoupledState,
    params: ModelParams,
    alpha: float,
    mass_eps: float = MASS_EPS,
    z_eps: float = Z_EPS,
) -> tuple[CoupledState, StepEvents]:
    """Apply the composed map once: LV in each region, then conflict.

    A region whose post-LV mass is at most ``mass_eps`` cannot be normalized;
    the conflict substep is then skipped and flagged. ``alpha == 0`` skips the
    normalize/denormalize round trip entirely so the uncoupled case is exact.
    """
    alpha = check_alpha(alpha)
    step = state.step + 1
    try:
        P, clamp_p = lv_step(params, state.P)
        R, clamp_r = lv_step(params, state.R)
    except DivergenceError as exc:
        raise DivergenceError(step, state.P + state.R) from exc
    clamped = tuple((REGION_A, i) for i in clamp_p) + tuple((REGION_B, i) for i in clamp_r)

    if alpha == 0.0:
        return CoupledState(P, R, step), StepEvents(clamped, False)
    if sum(P) <= mass_eps or sum(R) <= mass_eps:
        return CoupledState(P, R, step), StepEvents(clamped, True)

    pair = normalize(CoupledState(P, R), mass_eps)
    try:
        p, r, _ = conflict_compose(pair.p, pair.r, alpha, z_eps)
    except DegenerateNormalizerError as exc:
        raise DegenerateNormalizerError(exc.z, step) from exc
    out = denormalize(NormalizedPair(p, r, pair.mass_p, pair.mass_r), step)
    return out, StepEvents(clamped, False)


@dataclass
class Trajectory:
    """States ``x[k] = (P1, P2, R1, R2)`` for ``k = step0 .. step0 + len - 1``."""

    states: np.ndarray
    events: list[StepEvents] = field(default_factory=list)
    step0: int = 0

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, k: int) -> CoupledState:
        if k < 0:
            k += len(self)
        return CoupledState.from_vector(self.states[k], self.step0 + k)

    def __iter__(self) -> Iterator[CoupledState]:
        for k in range(len(self)):
            yield self[k]

    def event(self, k: int) -> StepEvents:
        """Events of the step that produced state ``k`` (state 0 has none)."""
        return NO_EVENTS if k == 0 else self.events[k - 1]

    @property
    def final(self) -> CoupledState:
        return self[len(self) - 1]

    @property
    def P(self) -> np.ndarray:
        return self.states[:, : self.states.shape[1] // 2]

    @property
    def R(self) -> np.ndarray:
        return self.states[:, self.states.shape[1] // 2 :]


def simulate(
    state0: CoupledState,
    params: ModelParams,
    alpha: float,
    steps: int,
    mass_eps: float = MASS_EPS,
    z_eps: float = Z_EPS,
    cap: float = math.inf,
) -> Trajectory:
    """Iterate ``step_F`` ``steps`` times starting from ``state0``.

    ``cap`` adds an early divergence threshold on top of non-finite values.
    On divergence a :class:`DivergenceError` is raised whose ``trajectory``
    holds every state computed before the failing step.
    """
    if int(steps) != steps or steps < 1:
        raise ValueError(f"steps must be a positive integer, got {steps!r}")
    steps = int(steps)
    alpha = check_alpha(alpha)
    if state0.n != 2:
        raise ValueError("simulate requires N = 2 (prey, predator) regions")

    a, b, c, d, e, f = params.a, params.b, params.c, params.d, params.e, params.f
    out = np.empty((steps + 1, 4))
    out[0] = state0.P + state0.R
    events: list[StepEvents] = []
    P1, P2 = state0.P
    R1, R2 = state0.R
    coupled = alpha != 0.0

    for k in range(1, steps + 1):
        nP1 = P1 + P1 * (a - b * P2 - c * P1)
        nP2 = P2 + P2 * (-d + e * P1 - f * P2)
        nR1 = R1 + R1 * (a - b * R2 - c * R1)
        nR2 = R2 + R2 * (-d + e * R1 - f * R2)
        # NaN fails every comparison, so "not <= cap" also catches it
        if not (abs(nP1) <= cap and abs(nP2) <= cap and abs(nR1) <= cap and abs(nR2) <= cap) or not (
            math.isfinite(nP1) and math.isfinite(nP2) and math.isfinite(nR1) and math.isfinite(nR2)
        ):
            partial = Trajectory(out[:k].copy(), events, state0.step)
            raise DivergenceError(state0.step + k, (nP1, nP2, nR1, nR2), partial)

        clamped = ()
        if nP1 < 0.0 or nP2 < 0.0 or nR1 < 0.0 or nR2 < 0.0:
            clamped = []
            if nP1 < 0.0:
                nP1 = 0.0
                clamped.append((REGION_A, 0))
            if nP2 < 0.0:
                nP2 = 0.0
                clamped.append((REGION_A, 1))
            if nR1 < 0.0:
                nR1 = 0.0
                clamped.append((REGION_B, 0))
            if nR2 < 0.0:
                nR2 = 0.0
                clamped.append((REGION_B, 1))
            clamped = tuple(clamped)

        skipped = False
        if coupled:
            mp = nP1 + nP2
            mr = nR1 + nR2
            if mp <= mass_eps or mr <= mass_eps:
                skipped = True
            else:
                p1 = nP1 / mp
                p2 = nP2 / mp
                r1 = nR1 / mr
                r2 = nR2 / mr
                z = 1.0 - alpha * (p1 * r1 + p2 * r2)
                if abs(z) <= z_eps:
                    raise DegenerateNormalizerError(z, state0.step + k)
                nP1 = p1 * (1.0 - alpha * r1) / z * mp
                nP2 = p2 * (1.0 - alpha * r2) / z * mp
                nR1 = r1 * (1.0 - alpha * p1) / z * mr
                nR2 = r2 * (1.0 - alpha * p2) / z * mr

        P1, P2, R1, R2 = nP1, nP2, nR1, nR2
        row = out[k]
        row[0] = P1
        row[1] = P2
        row[2] = R1
        row[3] = R2
        events.append(StepEvents(clamped, skipped) if (clamped or skipped) else NO_EVENTS)

    return Trajectory(out, events, state0.step)


def coupled_map(x: Sequence[float], params: ModelParams, alpha: float) -> np.ndarray:
    """``F`` on a flat ``(P1, P2, R1, R2)`` vector (used by the solvers)."""
    nxt, _ = step_F(CoupledState.from_vector(x), params, alpha)
    return np.array(nxt.P + nxt.R)
