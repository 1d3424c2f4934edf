"""Equilibria, stability and long-run behaviour of the coupled map."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Optional, Sequence, Union

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import cdist, directed_hausdorff

from .dynamics import (
    MASS_EPS,
    Z_EPS,
    CoupledState,
    ModelParams,
    check_alpha,
    coupled_map,
    simulate,
)
from .errors import (
    DegenerateTermsError,
    DivergenceError,
    InvalidBracketError,
    NoInteriorEquilibriumError,
    NumericError,
    SolverFailure,
    UndeterminedMidpointError,
)

log = logging.getLogger(__name__)

STABILITY_DEAD_BAND = 1e-3


# ---------------------------------------------------------------------------
# equilibria


def lv_equilibrium(params: ModelParams) -> tuple[float, float]:
    """Interior fixed point of the uncoupled prey-predator map.

    Solves ``a - b*P2 - c*P1 = 0`` and ``-d + e*P1 - f*P2 = 0``.
    """
    den = params.b * params.e + params.c * params.f
    num1 = params.a * params.f + params.b * params.d
    num2 = params.a * params.e - params.c * params.d
    if den <= 0 or num1 <= 0 or num2 <= 0:
        raise NoInteriorEquilibriumError(f"no interior equilibrium for {params}")
    return num1 / den, num2 / den


@dataclass(frozen=True)
class EquilibriumSystemTerms:
    Z1: float
    Z2: float
    Z: float


def equilibrium_residual(
    x: Sequence[float], params: ModelParams, alpha: float, debug: bool = False
) -> tuple[np.ndarray, EquilibriumSystemTerms]:
    """Residuals of the polynomial fixed-point system of the coupled map.

    ``x = (P1, P2, R1, R2)``. ``Z1``/``Z2`` are the post-LV region masses and
    ``Z = Z1*Z2*(1 - alpha*(p, r))``. Component ``j`` equals
    ``Z * (F(x)_j / x_j - 1)``, so it vanishes exactly where ``F`` fixes a
    positive coordinate.
    """
    alpha = check_alpha(alpha)
    P1, P2, R1, R2 = (float(v) for v in x)
    if min(P1, P2, R1, R2) < 0:
        raise ValueError("equilibrium_residual needs a nonnegative state")
    a, b, c, d, e, f = params.a, params.b, params.c, params.d, params.e, params.f
    gP1 = a + 1 - b * P2 - c * P1
    gP2 = -d + 1 + e * P1 - f * P2
    gR1 = a + 1 - b * R2 - c * R1
    gR2 = -d + 1 + e * R1 - f * R2
    Z1 = P1 * gP1 + P2 * gP2
    Z2 = R1 * gR1 + R2 * gR2
    if abs(Z1) <= 1e-12 or abs(Z2) <= 1e-12:
        raise DegenerateTermsError(f"region mass terms vanish: Z1={Z1!r}, Z2={Z2!r}")
    Z = Z1 * Z2 - alpha * (P1 * R1 * gP1 * gR1 + P2 * R2 * gP2 * gR2)
    res = np.array(
        [
            gP1 * (Z2 - alpha * R1 * gR1) * Z1 - Z,
            gP2 * (Z2 - alpha * R2 * gR2) * Z1 - Z,
            gR1 * (Z1 - alpha * P1 * gP1) * Z2 - Z,
            gR2 * (Z1 - alpha * P2 * gP2) * Z2 - Z,
        ]
    )
    if debug:
        direct = coupled_map(x, params, alpha) - np.array([P1, P2, R1, R2])
        scaled = np.array([P1, P2, R1, R2]) * res / Z
        if not np.allclose(direct, scaled, rtol=1e-8, atol=1e-9 * max(1.0, abs(Z1) + abs(Z2))):
            raise AssertionError(f"residual system disagrees with F(x) - x: {scaled} vs {direct}")
    return res, EquilibriumSystemTerms(Z1=Z1, Z2=Z2, Z=Z)


def finite_difference_jacobian(
    func: Callable[[np.ndarray], np.ndarray], x: Sequence[float], fx: Optional[np.ndarray] = None
) -> np.ndarray:
    """Forward-difference Jacobian with step ``max(1e-6, 1e-6 * |x_i|)``."""
    x = np.asarray(x, dtype=float)
    if fx is None:
        fx = func(x)
    J = np.empty((fx.size, x.size))
    for i in range(x.size):
        h = max(1e-6, 1e-6 * abs(x[i]))
        xh = x.copy()
        xh[i] += h
        J[:, i] = (func(xh) - fx) / h
    return J


def spectral_radius(A: np.ndarray, squarings: int = 60) -> float:
    """Spectral radius from the growth of ``||A^k||`` (Gelfand's formula).

    Powers ``A^(2^j)`` are formed by repeated normalized squaring, keeping the
    log of the dropped scale, so ``rho ~ exp(log||A^(2^j)|| / 2^j)``. Unlike
    single-vector power iteration this does not stall when the dominant
    eigenvalues form a complex-conjugate pair, which is the usual case at a
    spiral fixed point.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("spectral_radius needs a square matrix")
    norm = np.linalg.norm(A, 2) if A.size else 0.0
    if norm == 0.0:
        return 0.0
    B = A / norm
    log_norm = math.log(norm)
    estimate = norm
    for j in range(1, squarings + 1):
        B = B @ B
        s = np.linalg.norm(B, 2)
        if s == 0.0:
            return 0.0
        B /= s
        log_norm = 2 * log_norm + math.log(s)
        new = math.exp(log_norm / 2**j)
        if abs(new - estimate) <= 1e-15 * max(new, 1.0):
            return new
        estimate = new
    return estimate


@dataclass
class EquilibriumResult:
    point: np.ndarray
    residual_norm: float
    spectral_radius: float
    stable: Optional[bool]
    iterations: int

    @property
    def state(self) -> CoupledState:
        return CoupledState.from_vector(self.point)


def _verdict(rho: float) -> Optional[bool]:
    if rho < 1 - STABILITY_DEAD_BAND:
        return True
    if rho > 1 + STABILITY_DEAD_BAND:
        return False
    return None


def solve_equilibrium(
    params: ModelParams,
    alpha: float,
    seed: Sequence[float],
    tol: float = 1e-10,
    max_iter: int = 200,
) -> EquilibriumResult:
    """Damped Newton iteration on ``G(x) = F(x) - x``.

    Steps are halved (up to 40 times) until ``||G||_inf`` decreases, and
    iterates are projected onto the nonnegative orthant. Reports the spectral
    radius of the Jacobian of ``F`` at the solution.
    """
    alpha = check_alpha(alpha)
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.asarray(seed, dtype=float).copy()
    if x.shape != (4,) or np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("seed must be a nonnegative 4-vector (P1, P2, R1, R2)")

    def G(v):
        return coupled_map(v, params, alpha) - v

    g = G(x)
    gnorm = float(np.max(np.abs(g)))
    it = 0
    while gnorm > tol and it < max_iter:
        it += 1
        J = finite_difference_jacobian(G, x, g)
        try:
            dx = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -g, rcond=None)[0]
        lam = 1.0
        for _ in range(41):
            x_try = np.maximum(x + lam * dx, 0.0)
            try:
                g_try = G(x_try)
                n_try = float(np.max(np.abs(g_try)))
            except NumericError:
                n_try = math.inf
            if n_try < gnorm:
                break
            lam *= 0.5
        else:
            # no decrease along the Newton direction: rounding floor reached
            break
        x, g, gnorm = x_try, g_try, n_try

    residual = float(np.max(np.abs(coupled_map(x, params, alpha) - x)))
    if residual > tol:
        raise SolverFailure(
            f"Newton did not reach tol={tol} (residual {residual:.3g} after {it} iterations)",
            best=x,
            residual=residual,
            iterations=it,
        )
    J_F = finite_difference_jacobian(lambda v: coupled_map(v, params, alpha), x)
    rho = spectral_radius(J_F)
    return EquilibriumResult(point=x, residual_norm=residual, spectral_radius=rho, stable=_verdict(rho), iterations=it)


# ---------------------------------------------------------------------------
# attractors


@dataclass(frozen=True)
class FixedPoint:
    tag: ClassVar[str] = "fixed_point"
    point: tuple[float, ...]


@dataclass(frozen=True)
class Cycle:
    tag: ClassVar[str] = "cycle"
    lag: int
    loop_points: np.ndarray = field(compare=False, repr=False)


@dataclass(frozen=True)
class Divergent:
    tag: ClassVar[str] = "divergent"
    step: int


@dataclass(frozen=True)
class Extinct:
    tag: ClassVar[str] = "extinct"
    region: str


@dataclass(frozen=True)
class Undetermined:
    tag: ClassVar[str] = "undetermined"
    note: str = ""


AttractorClass = Union[FixedPoint, Cycle, Divergent, Extinct, Undetermined]


@dataclass(frozen=True)
class ClassifyOptions:
    total_steps: int = 70_000
    transient: Optional[int] = None  # None: total_steps // 2
    tol_fixed: float = 1e-8
    tol_cycle: float = 1e-5  # relative to the tail's sup-norm diameter
    lag_max: int = 5000
    divergence_cap: float = 1e9
    fixed_window: int = 1000
    mass_eps: float = MASS_EPS
    z_eps: float = Z_EPS
    max_loop_points: int = 2000

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")
        if self.transient is not None and not (0 <= self.transient < self.total_steps):
            raise ValueError("transient must lie in [0, total_steps)")
        for name in ("tol_fixed", "tol_cycle", "divergence_cap", "mass_eps", "z_eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.lag_max < 2 or self.fixed_window < 1:
            raise ValueError("lag_max must be >= 2 and fixed_window >= 1")

    @property
    def transient_steps(self) -> int:
        return self.total_steps // 2 if self.transient is None else self.transient


_SCREEN = 256


def classify_tail(tail: np.ndarray, opts: ClassifyOptions = ClassifyOptions()) -> AttractorClass:
    """Classify the post-transient states ``tail`` (rows ``P1, P2, R1, R2``)."""
    tail = np.asarray(tail, dtype=float)
    if tail.ndim != 2 or tail.shape[0] == 0:
        raise ValueError("tail must be a non-empty 2-D array")
    half = tail.shape[1] // 2
    if np.all(tail[:, :half].sum(axis=1) <= opts.mass_eps):
        return Extinct("A")
    if np.all(tail[:, half:].sum(axis=1) <= opts.mass_eps):
        return Extinct("B")

    last = tail[-1]
    window = tail[-opts.fixed_window :]
    if np.max(np.abs(window - last)) < opts.tol_fixed:
        return FixedPoint(tuple(float(v) for v in last))

    diam = float(np.max(tail.max(axis=0) - tail.min(axis=0)))
    thr = opts.tol_cycle * diam
    n = tail.shape[0]
    screen = min(_SCREEN, n)
    for k in range(2, min(opts.lag_max, n - 1) + 1):
        # a failing suffix already rules out lag k for the whole window
        m = min(screen, n - k)
        if np.max(np.abs(tail[n - m :] - tail[n - m - k : n - k])) >= thr:
            continue
        if np.max(np.abs(tail[k:] - tail[:-k])) < thr:
            loop = tail[-k:]
            if k > opts.max_loop_points:
                loop = loop[:: math.ceil(k / opts.max_loop_points)]
            return Cycle(lag=k, loop_points=loop.copy())
    return Undetermined("no fixed point or cycle with lag <= %d" % opts.lag_max)


def classify_attractor(
    state0: CoupledState, params: ModelParams, alpha: float, opts: ClassifyOptions = ClassifyOptions()
) -> AttractorClass:
    """Simulate ``opts.total_steps`` steps and classify the long-run behaviour."""
    try:
        traj = simulate(
            state0, params, alpha, opts.total_steps, mass_eps=opts.mass_eps, z_eps=opts.z_eps, cap=opts.divergence_cap
        )
    except DivergenceError as exc:
        return Divergent(exc.step)
    except NumericError as exc:
        return Undetermined(str(exc))
    return classify_tail(traj.states[opts.transient_steps :], opts)


def post_transient_orbit(
    state0: CoupledState, params: ModelParams, alpha: float, opts: ClassifyOptions = ClassifyOptions()
) -> np.ndarray:
    traj = simulate(state0, params, alpha, opts.total_steps, mass_eps=opts.mass_eps, z_eps=opts.z_eps)
    return traj.states[opts.transient_steps :]


@dataclass(frozen=True)
class BifurcationBracket:
    alpha_lo: float
    alpha_hi: float
    class_lo: str
    class_hi: str
    alpha_star: float
    width: float


def bifurcation_bisect(
    params: ModelParams,
    state0: CoupledState,
    alpha_lo: float,
    alpha_hi: float,
    resolution: float,
    opts: ClassifyOptions = ClassifyOptions(),
) -> BifurcationBracket:
    """Bisect in ``alpha`` on a change of attractor class."""
    lo, hi = check_alpha(alpha_lo), check_alpha(alpha_hi)
    if not lo < hi:
        raise ValueError("alpha_lo must be smaller than alpha_hi")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    tag_lo = classify_attractor(state0, params, lo, opts).tag
    tag_hi = classify_attractor(state0, params, hi, opts).tag
    if tag_lo == tag_hi:
        raise InvalidBracketError(f"both ends of [{lo}, {hi}] classify as {tag_lo}")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        tag = classify_attractor(state0, params, mid, opts).tag
        log.debug("bisect alpha=%r -> %s", mid, tag)
        if tag == Undetermined.tag:
            raise UndeterminedMidpointError(mid, (lo, hi))
        if tag == tag_lo:
            lo = mid
        else:
            hi, tag_hi = mid, tag
    return BifurcationBracket(lo, hi, tag_lo, tag_hi, 0.5 * (lo + hi), hi - lo)


# ---------------------------------------------------------------------------
# orbit geometry


def cycle_hausdorff(orbit_a: np.ndarray, orbit_b: np.ndarray) -> float:
    """Symmetric Euclidean Hausdorff distance between two point sets."""
    a = np.atleast_2d(np.asarray(orbit_a, dtype=float))
    b = np.atleast_2d(np.asarray(orbit_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("cycle_hausdorff needs non-empty point sets")
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets live in different dimensions")
    return max(directed_hausdorff(a, b, seed=0)[0], directed_hausdorff(b, a, seed=0)[0])


def orbit_diameter(points: np.ndarray) -> float:
    """Largest Euclidean distance between two points of the set."""
    pts = np.unique(np.atleast_2d(np.asarray(points, dtype=float)), axis=0)
    if pts.shape[0] < 2:
        return 0.0
    if pts.shape[0] > pts.shape[1] + 1:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass  # flat set: fall back to all points
    best = 0.0
    for start in range(0, pts.shape[0], 2048):
        best = max(best, float(cdist(pts[start : start + 2048], pts).max()))
    return best
