"""Iterated conflict composition on stochastic vectors and its limits.

At ``alpha = 1`` the limits are orthogonal and follow from the difference
profile ``d = p - r`` alone; at ``alpha = -1`` both vectors converge to the
same vector, uniform on a shared support. ``prop1_vanishes`` and
``prop2_vanishes`` are sufficient conditions for a coordinate to drop out of
that support.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .dynamics import Z_EPS, as_stochastic, check_alpha
from .errors import DegenerateNormalizerError, DegenerateProfileError, UndeterminedSupportError

log = logging.getLogger(__name__)

PROFILE_EPS = 1e-12
ORTHO_TOL = 1e-8
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1_000_000


@dataclass(frozen=True)
class DifferenceProfile:
    d: tuple[float, ...]
    n_plus: frozenset[int]
    n_minus: frozenset[int]
    D: float


@dataclass(frozen=True)
class SigmaRho:
    sigma: float
    rho: float


class LimitClass(str, Enum):
    ORTHOGONAL = "orthogonal"
    EQUAL = "equal"
    OTHER = "other"


@dataclass(frozen=True)
class LimitReport:
    p_limit: tuple[float, ...]
    r_limit: tuple[float, ...]
    iterations: int
    converged: bool
    classification: LimitClass
    final_inner: float


@dataclass(frozen=True)
class SupportSets:
    s0: frozenset[int]
    s_inf: frozenset[int]

    @property
    def m(self) -> int:
        return len(self.s_inf)


def _inner(p: Sequence[float], r: Sequence[float]) -> float:
    return math.fsum(pi * ri for pi, ri in zip(p, r))


def difference_profile(p: Sequence[float], r: Sequence[float]) -> DifferenceProfile:
    p = as_stochastic(p)
    r = as_stochastic(r)
    if len(p) != len(r):
        raise ValueError("p and r must have equal length")
    d = tuple(pi - ri for pi, ri in zip(p, r))
    if max(abs(x) for x in d) <= PROFILE_EPS:
        raise DegenerateProfileError("p == r: the difference profile is identically zero")
    n_plus = frozenset(i for i, x in enumerate(d) if x > 0)
    n_minus = frozenset(i for i, x in enumerate(d) if x < 0)
    D = math.fsum(d[i] for i in n_plus)
    return DifferenceProfile(d, n_plus, n_minus, D)


def closed_form_repulsive(p: Sequence[float], r: Sequence[float]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Limits of the ``alpha = 1`` iteration computed from ``d = p - r``.

    ``p`` keeps the positions where it leads, weighted by its lead; ``r``
    likewise. The result depends on ``p`` and ``r`` only through ``d``.
    """
    prof = difference_profile(p, r)
    if _inner(p, r) <= 0.0:
        raise ValueError("closed_form_repulsive requires (p, r) > 0")
    n = len(prof.d)
    p_inf = tuple(prof.d[i] / prof.D if i in prof.n_plus else 0.0 for i in range(n))
    # sum(d) = 0, so the negative part also has mass D; using it keeps r_inf stochastic in floats
    D_minus = -math.fsum(prof.d[i] for i in prof.n_minus)
    r_inf = tuple(-prof.d[i] / D_minus if i in prof.n_minus else 0.0 for i in range(n))
    return p_inf, r_inf


def iterate_conflict(
    p0: Sequence[float],
    r0: Sequence[float],
    alpha: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    ortho_tol: float = ORTHO_TOL,
    eq_tol: float | None = None,
    z_eps: float = Z_EPS,
) -> LimitReport:
    """Compose repeatedly until no coordinate moves by ``tol`` or more.

    The limit is classified ``ORTHOGONAL`` when its inner product is at most
    ``ortho_tol`` and ``EQUAL`` when the vectors agree within ``eq_tol``
    (default ``1e3 * tol``: the residual gap shrinks only geometrically once
    steps fall below ``tol``).
    """
    p = as_stochastic(p0)
    r = as_stochastic(r0)
    if len(p) != len(r):
        raise ValueError("p0 and r0 must have equal length")
    alpha = check_alpha(alpha)
    if tol <= 0:
        raise ValueError("tol must be positive")

    # plain float loop: this runs up to max_iter times per call
    n = len(p)
    idx = range(n)
    converged = False
    it = 0
    while it < max_iter:
        inner = 0.0
        for i in idx:
            inner += p[i] * r[i]
        z = 1.0 - alpha * inner
        if abs(z) <= z_eps:
            raise DegenerateNormalizerError(z, it + 1)
        p_new = [p[i] * (1.0 - alpha * r[i]) / z for i in idx]
        r_new = [r[i] * (1.0 - alpha * p[i]) / z for i in idx]
        it += 1
        moved = 0.0
        for i in idx:
            dp = abs(p_new[i] - p[i])
            dr = abs(r_new[i] - r[i])
            if dp > moved:
                moved = dp
            if dr > moved:
                moved = dr
        p, r = p_new, r_new
        if moved < tol:
            converged = True
            break

    p, r = tuple(p), tuple(r)
    final_inner = _inner(p, r)
    if final_inner <= ortho_tol:
        cls = LimitClass.ORTHOGONAL
    elif max(abs(a - b) for a, b in zip(p, r)) <= (1e3 * tol if eq_tol is None else eq_tol):
        cls = LimitClass.EQUAL
    else:
        cls = LimitClass.OTHER
        log.warning("conflict iteration settled in neither orthogonal nor equal state: p=%s r=%s", p, r)
    return LimitReport(p, r, it, converged, cls, final_inner)


def sigma_rho(p: Sequence[float], r: Sequence[float], i: int) -> SigmaRho:
    if not (0 <= i < len(p)) or len(p) != len(r):
        raise IndexError(f"index {i} out of range for vectors of length {len(p)}")
    return SigmaRho(sigma=p[i] + r[i], rho=p[i] * r[i])


def _check_pair(p, r, i, k):
    if i == k:
        raise ValueError("i and k must differ")
    return sigma_rho(p, r, i), sigma_rho(p, r, k)


def prop1_vanishes(p: Sequence[float], r: Sequence[float], i: int, k: int) -> bool:
    """True when coordinate ``i`` dominates ``k`` in both sum and product.

    Under attractive iteration (``alpha = -1``) such a ``k`` ends with
    ``p_k, r_k -> 0``.
    """
    si, sk = _check_pair(p, r, i, k)
    return (si.sigma >= sk.sigma and si.rho > sk.rho) or (si.sigma > sk.sigma and si.rho >= sk.rho)


def prop2_vanishes(p: Sequence[float], r: Sequence[float], i: int, k: int) -> bool:
    """``k`` has the larger sum but the smaller product, and
    ``2 rho_k + sigma_k <= 2 rho_i + sigma_i``; ``k`` still vanishes at ``alpha = -1``.
    """
    si, sk = _check_pair(p, r, i, k)
    return sk.sigma > si.sigma and sk.rho < si.rho and 2 * sk.rho + sk.sigma <= 2 * si.rho + si.sigma


def attractive_limit(
    p: Sequence[float],
    r: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[tuple[float, ...], SupportSets]:
    """Uniform limit of the ``alpha = -1`` iteration and its support split.

    A coordinate joins ``S0`` when both limits fall below ``1e3 * tol``; the
    iterate must then sit within ten times that threshold of the uniform vector.
    """
    p = as_stochastic(p)
    r = as_stochastic(r)
    if _inner(p, r) <= 0.0:
        raise ValueError("attractive_limit requires (p, r) > 0")
    rep = iterate_conflict(p, r, -1.0, tol=tol, max_iter=max_iter)
    if not rep.converged:
        raise UndeterminedSupportError(f"no convergence within {rep.iterations} iterations")

    threshold = tol * 1e3
    n = len(p)
    s0 = frozenset(k for k in range(n) if rep.p_limit[k] < threshold and rep.r_limit[k] < threshold)
    s_inf = frozenset(range(n)) - s0
    m = len(s_inf)
    uniform = tuple(1.0 / m if k in s_inf else 0.0 for k in range(n))
    # the support is only trusted if the iterate actually sits on the uniform vector
    slack = 10 * threshold
    worst = max(max(abs(a - u), abs(b - u)) for a, b, u in zip(rep.p_limit, rep.r_limit, uniform))
    if worst > slack:
        raise UndeterminedSupportError(
            f"iterated limit is {worst:.3g} away from the uniform vector on {sorted(s_inf)}"
        )
    return uniform, SupportSets(s0=s0, s_inf=s_inf)
