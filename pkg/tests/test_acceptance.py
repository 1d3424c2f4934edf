"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a ``CRITERION n: PASS|FAIL`` line that is printed in the
pytest terminal summary. Run ``python3 tests/test_acceptance.py`` to get the
same lines without pytest.
"""

import itertools
import time

import numpy as np
import pytest

from conflict_volterra.analysis import (
    ClassifyOptions,
    Cycle,
    bifurcation_bisect,
    classify_attractor,
    cycle_hausdorff,
    equilibrium_residual,
    lv_equilibrium,
    orbit_diameter,
    post_transient_orbit,
    solve_equilibrium,
)
from conflict_volterra.atlas import AlphaRange, SweepSpec, run_sweep
from conflict_volterra.conflict import (
    closed_form_repulsive,
    iterate_conflict,
    prop1_vanishes,
    prop2_vanishes,
)
from conflict_volterra.dynamics import CoupledState, ModelParams, conflict_compose, lv_step, simulate
from conflict_volterra.formats import write_atlas_jsonl
from oracles import random_stochastic_pair

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = {}

STD = ModelParams.standard()
SEED_STD = CoupledState((3.0, 10.0), (5.0, 20.0))
SEED_EXTERIOR = CoupledState((3.0, 5.0), (7.0, 10.0))
SEED_INTERIOR = CoupledState((4.1, 32.0), (4.0, 32.0))

# [PAPER] printed equilibria of the coupled system (region A == region B)
PUBLISHED_EQ = {0.005: (4.043507, 32.100629), 0.01: (4.087615, 32.200863)}
PUBLISHED_ALPHA_STAR = 0.0056781739


def record(n: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)


def _random_pairs(seed):
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < 100:
        n = int(rng.integers(2, 9))
        p, r = random_stochastic_pair(rng, n)
        if np.max(np.abs(p - r)) > 1e-9:
            pairs.append((tuple(p), tuple(r)))
    return pairs


_REPULSIVE_LIMITS = []


def _repulsive_limits():
    if not _REPULSIVE_LIMITS:
        for p, r in _random_pairs(20261017):
            _REPULSIVE_LIMITS.append((p, r, iterate_conflict(p, r, 1.0)))
    return _REPULSIVE_LIMITS


def test_criterion_01_repulsive_closed_form():
    t0 = time.perf_counter()
    _REPULSIVE_LIMITS.clear()
    reports = _repulsive_limits()
    elapsed = time.perf_counter() - t0
    worst_dev = worst_inner = 0.0
    for p, r, rep in reports:
        p_cf, r_cf = closed_form_repulsive(p, r)
        worst_dev = max(worst_dev, np.max(np.abs(np.subtract(rep.p_limit, p_cf))), np.max(np.abs(np.subtract(rep.r_limit, r_cf))))
        worst_inner = max(worst_inner, rep.final_inner)
    ok = worst_dev <= 1e-6 and worst_inner <= 1e-8 and elapsed <= 10.0
    record(1, ok, f"max |limit - closed form| = {worst_dev:.2e}, max inner = {worst_inner:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_limit_invariance():
    worst = 0.0
    for _, _, rep in _repulsive_limits():
        p2, r2, _ = conflict_compose(rep.p_limit, rep.r_limit, 1.0)
        worst = max(worst, np.max(np.abs(np.subtract(p2, rep.p_limit))), np.max(np.abs(np.subtract(r2, rep.r_limit))))
    ok = worst <= 1e-10
    record(2, ok, f"max move under one more step = {worst:.2e}")
    assert ok


def test_criterion_03_attractive_uniform_and_vanishing():
    t0 = time.perf_counter()
    worst_uniform = worst_vanish = 0.0
    checked = 0
    for p, r in _random_pairs(31):
        rep = iterate_conflict(p, r, -1.0)
        lim_p, lim_r = np.array(rep.p_limit), np.array(rep.r_limit)
        support = (lim_p >= 1e-6) | (lim_r >= 1e-6)
        uniform = np.where(support, 1.0 / support.sum(), 0.0)
        worst_uniform = max(worst_uniform, np.max(np.abs(lim_p - uniform)), np.max(np.abs(lim_r - uniform)))
        for i, k in itertools.permutations(range(len(p)), 2):
            if prop1_vanishes(p, r, i, k) or prop2_vanishes(p, r, i, k):
                checked += 1
                worst_vanish = max(worst_vanish, lim_p[k], lim_r[k])
    elapsed = time.perf_counter() - t0
    ok = worst_uniform <= 1e-8 and worst_vanish < 1e-6 and elapsed <= 10.0
    record(
        3,
        ok,
        f"max |limit - uniform| = {worst_uniform:.2e}, max vanishing coord = {worst_vanish:.2e} "
        f"over {checked} (i,k) pairs, {elapsed:.2f} s",
    )
    assert ok


def test_criterion_04_uncoupled_equilibrium():
    eq = lv_equilibrium(STD)
    assert lv_step(STD, eq)[0] == eq
    traj = simulate(CoupledState(eq, eq), STD, 0.0, 1000)
    drift = float(np.max(np.abs(traj.states - np.array(eq + eq))))
    ok = eq == (4.0, 32.0) and drift <= 1e-9
    record(4, ok, f"equilibrium = {eq}, max drift over 1000 steps = {drift:.1e}")
    assert ok


def test_criterion_05_equilibrium_shift():
    t0 = time.perf_counter()
    results = {a: solve_equilibrium(STD, a, (4.0, 32.0, 4.0, 32.0)) for a in PUBLISHED_EQ}
    elapsed = time.perf_counter() - t0
    devs = {}
    for a, (P1, P2) in PUBLISHED_EQ.items():
        devs[a] = float(np.max(np.abs(results[a].point - np.array([P1, P2, P1, P2]))))
    unstable = results[0.01].stable is False
    ok = max(devs.values()) <= 1e-4 and unstable and elapsed <= 5.0
    detail = "; ".join(
        f"alpha={a}: got ({results[a].point[0]:.6f}, {results[a].point[1]:.6f}), dev {devs[a]:.2e}, "
        f"rho {results[a].spectral_radius:.5f}"
        for a in PUBLISHED_EQ
    )
    record(5, ok, f"{detail}; alpha=0.01 unstable: {unstable}; {elapsed:.2f} s")
    assert ok


def test_criterion_06_residual_cross_check():
    printed = max(
        float(np.max(np.abs(equilibrium_residual((P1, P2, P1, P2), STD, a)[0]))) for a, (P1, P2) in PUBLISHED_EQ.items()
    )
    solved = max(
        float(np.max(np.abs(equilibrium_residual(solve_equilibrium(STD, a, (4.0, 32.0, 4.0, 32.0)).point, STD, a)[0])))
        for a in PUBLISHED_EQ
    )
    ok = printed <= 1e-3 and solved <= 1e-8
    record(6, ok, f"residual at printed points = {printed:.3g} (<= 1e-3), at solved points = {solved:.2e} (<= 1e-8)")
    assert ok


def test_criterion_07_first_bifurcation():
    t0 = time.perf_counter()
    try:
        br = bifurcation_bisect(STD, SEED_STD, 0.004, 0.007, 1e-6)
        alpha_star, note = br.alpha_star, f"{br.class_lo} -> {br.class_hi}"
    except Exception as exc:
        alpha_star, note = None, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    ok = alpha_star is not None and abs(alpha_star - PUBLISHED_ALPHA_STAR) <= 5e-3 and elapsed <= 120.0
    record(7, ok, f"alpha* = {alpha_star} ({note}), {elapsed:.1f} s")
    assert ok


def test_criterion_08_limit_cycle_basin():
    t0 = time.perf_counter()
    opts = ClassifyOptions(total_steps=70_000)
    cls_out = classify_attractor(SEED_EXTERIOR, STD, 0.01, opts)
    cls_in = classify_attractor(SEED_INTERIOR, STD, 0.01, opts)
    orbit_out = post_transient_orbit(SEED_EXTERIOR, STD, 0.01, opts)
    orbit_in = post_transient_orbit(SEED_INTERIOR, STD, 0.01, opts)
    h = cycle_hausdorff(orbit_out, orbit_in)
    diam = orbit_diameter(np.vstack([orbit_out, orbit_in]))
    elapsed = time.perf_counter() - t0
    both_cycles = isinstance(cls_out, Cycle) and isinstance(cls_in, Cycle)
    ok = both_cycles and h <= 0.01 * diam and elapsed <= 60.0
    record(
        8,
        ok,
        f"exterior -> {cls_out.tag}, interior -> {cls_in.tag}, Hausdorff {h:.2e} vs diameter {diam:.2e}, {elapsed:.1f} s",
    )
    assert ok


def test_criterion_09_alpha_zero_reduction():
    s0 = CoupledState((3.0, 5.0), (7.0, 10.0))
    traj = simulate(s0, STD, 0.0, 10_000)
    A, B = [s0.P], [s0.R]
    for _ in range(10_000):
        A.append(lv_step(STD, A[-1])[0])
        B.append(lv_step(STD, B[-1])[0])
    ok = np.array_equal(traj.P, np.array(A)) and np.array_equal(traj.R, np.array(B))
    record(9, ok, "coupled alpha=0 run is bitwise equal to two independent LV runs" if ok else "runs differ")
    assert ok


def test_criterion_10_sweep_determinism():
    def sweep(workers):
        spec = SweepSpec(STD, AlphaRange(0.004, 0.007, 8), (SEED_STD,), ClassifyOptions(total_steps=70_000), workers)
        return write_atlas_jsonl(run_sweep(spec))

    one, eight = sweep(1), sweep(8)
    ok = one == eight
    record(10, ok, f"1-worker and 8-worker JSONL identical ({len(one)} bytes)" if ok else "JSONL differs")
    assert ok


def test_criterion_11_regime_change():
    lo = classify_attractor(SEED_STD, STD, 0.4)
    hi = classify_attractor(SEED_STD, STD, 0.49)
    ok = lo.tag != hi.tag
    record(11, ok, f"alpha=0.4 -> {lo!r}, alpha=0.49 -> {hi!r}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
