"""Hand-written SVG 1.1 phase portraits."""

from __future__ import annotations

import math
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .dynamics import Trajectory

PLANES = {
    "p1p2": ((0, "P1"), (1, "P2")),
    "r1r2": ((2, "R1"), (3, "R2")),
    "p1r1": ((0, "P1"), (2, "R1")),
}

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 30, 50


def _fmt(v: float) -> str:
    s = "%.2f" % v
    return "0.00" if s == "-0.00" else s


def _tick(v: float) -> str:
    return "%.6g" % v


def render_phase_svg(
    trajectory: Trajectory | np.ndarray,
    plane: str = "p1p2",
    equilibrium: Optional[Sequence[float]] = None,
    transient: int = 0,
    max_points: int = 20000,
    title: Optional[str] = None,
) -> str:
    """Phase-plane polyline of a trajectory.

    ``equilibrium`` is a full ``(P1, P2, R1, R2)`` state drawn as a red
    marker. Long trajectories are thinned to at most ``max_points`` vertices
    by a fixed stride. A trajectory that never moves becomes one marker.
    """
    if plane not in PLANES:
        raise ValueError(f"plane must be one of {sorted(PLANES)}, got {plane!r}")
    states = trajectory.states if isinstance(trajectory, Trajectory) else np.asarray(trajectory, dtype=float)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("cannot render an empty trajectory")
    states = states[transient:]
    if states.shape[0] == 0:
        raise ValueError("transient removes every state")
    (ix, xlabel), (iy, ylabel) = PLANES[plane]
    xs, ys = states[:, ix], states[:, iy]
    if xs.size > max_points:
        stride = math.ceil(xs.size / max_points)
        xs, ys = np.append(xs[::stride], xs[-1]), np.append(ys[::stride], ys[-1])

    eq = None if equilibrium is None else (float(equilibrium[ix]), float(equilibrium[iy]))
    all_x = np.append(xs, eq[0]) if eq else xs
    all_y = np.append(ys, eq[1]) if eq else ys
    x0, x1 = float(all_x.min()), float(all_x.max())
    y0, y1 = float(all_y.min()), float(all_y.max())
    degenerate = float(xs.max() - xs.min()) == 0.0 and float(ys.max() - ys.min()) == 0.0
    if x1 == x0:
        x0, x1 = x0 - 0.5 * max(1.0, abs(x0)), x1 + 0.5 * max(1.0, abs(x1))
    if y1 == y0:
        y0, y1 = y0 - 0.5 * max(1.0, abs(y0)), y1 + 0.5 * max(1.0, abs(y1))

    pw, ph = WIDTH - MARGIN_L - MARGIN_R, HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN_T + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<text x="{MARGIN_L}" y="{HEIGHT - 30}" font-size="11" text-anchor="middle">{_tick(x0)}</text>',
        f'<text x="{MARGIN_L + pw}" y="{HEIGHT - 30}" font-size="11" text-anchor="middle">{_tick(x1)}</text>',
        f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + ph}" font-size="11" text-anchor="end">{_tick(y0)}</text>',
        f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + 4}" font-size="11" text-anchor="end">{_tick(y1)}</text>',
        f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 10}" font-size="13" text-anchor="middle">{xlabel}</text>',
        f'<text x="18" y="{MARGIN_T + ph / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {MARGIN_T + ph / 2:.1f})">{ylabel}</text>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" font-size="13" text-anchor="middle">{escape(title)}</text>')
    if degenerate:
        out.append(f'<circle cx="{_fmt(sx(xs[0]))}" cy="{_fmt(sy(ys[0]))}" r="4" fill="steelblue"/>')
    else:
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="steelblue" stroke-width="0.8" points="{pts}"/>')
    if eq is not None:
        out.append(f'<circle cx="{_fmt(sx(eq[0]))}" cy="{_fmt(sy(eq[1]))}" r="4" fill="crimson"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
