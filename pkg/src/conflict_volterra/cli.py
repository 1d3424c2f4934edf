"""``conflict-volterra`` command line.

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import analysis, atlas, conflict, formats, svg
from .config import RunConfig, parse_config
from .dynamics import CoupledState, ModelParams, simulate
from .errors import ConfigError, ConflictVolterraError, NumericError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("conflict_volterra")


def _load(args, required: bool = True) -> Optional[RunConfig]:
    if args.config is None:
        if required:
            raise ConfigError("--config", "this subcommand needs a configuration file")
        return None
    text = Path(args.config).read_text()
    return parse_config(text).with_overrides(alpha=args.alpha, steps=args.steps, tol=args.tol)


def _emit(data: bytes, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2))


def _classify_opts(cfg: RunConfig) -> analysis.ClassifyOptions:
    tol = cfg.tolerances
    return analysis.ClassifyOptions(
        total_steps=cfg.steps,
        transient=cfg.transient,
        tol_fixed=tol["tolFixed"],
        tol_cycle=tol["tolCycle"],
        mass_eps=tol["massEps"],
        z_eps=tol["zEps"],
    )


def _vector_arg(text: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(name, f"expected comma-separated numbers, got {text!r}") from None


# -- subcommands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = _load(args)
    tol = cfg.tolerances
    traj = simulate(
        CoupledState(cfg.P0, cfg.R0), cfg.params, cfg.alpha, cfg.steps, mass_eps=tol["massEps"], z_eps=tol["zEps"]
    )
    _emit(formats.write_trajectory_csv(traj), args.out or cfg.outputs.get("trajectory"))
    svg_path = args.svg or cfg.outputs.get("svg")
    if svg_path:
        doc = svg.render_phase_svg(traj, plane=args.plane, transient=cfg.transient, title=f"alpha = {cfg.alpha:g}")
        Path(svg_path).write_text(doc)
    return EXIT_OK


def cmd_conflict(args) -> int:
    cfg = _load(args, required=False)
    section = cfg.conflict if cfg else None
    p = _vector_arg(args.p, "--p") if args.p else (section.p if section else None)
    r = _vector_arg(args.r, "--r") if args.r else (section.r if section else None)
    if p is None or r is None:
        raise ConfigError("conflict", "give --p and --r or a 'conflict' section in the config")
    alpha = args.alpha if args.alpha is not None else (cfg.alpha if cfg else 1.0)
    tol = args.tol or (section.tol if section else conflict.DEFAULT_TOL)
    max_iter = section.max_iter if section else conflict.DEFAULT_MAX_ITER
    try:
        rep = conflict.iterate_conflict(p, r, alpha, tol=tol, max_iter=max_iter)
    except ValueError as exc:
        raise ConfigError("conflict", str(exc)) from None
    out = {
        "alpha": alpha,
        "p_limit": list(rep.p_limit),
        "r_limit": list(rep.r_limit),
        "iterations": rep.iterations,
        "converged": rep.converged,
        "classification": rep.classification.value,
        "final_inner": rep.final_inner,
    }
    if alpha == 1.0 and p != r:
        p_cf, r_cf = conflict.closed_form_repulsive(p, r)
        out["closed_form"] = {"p_limit": list(p_cf), "r_limit": list(r_cf)}
        out["max_deviation"] = max(abs(a - b) for a, b in zip(rep.p_limit + rep.r_limit, p_cf + r_cf))
    elif alpha == -1.0:
        uniform, sets = conflict.attractive_limit(p, r, tol=tol, max_iter=max_iter)
        out["uniform_limit"] = list(uniform)
        out["S0"] = sorted(i + 1 for i in sets.s0)
        out["m"] = sets.m
    _print_json(out)
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    cfg = _load(args, required=False)
    params = cfg.params if cfg else ModelParams.standard()
    alpha = args.alpha if args.alpha is not None else (cfg.alpha if cfg else 0.0)
    if args.seed:
        seed = _vector_arg(args.seed, "--seed")
    elif cfg:
        seed = cfg.P0 + cfg.R0
    else:
        seed = (4.0, 32.0, 4.0, 32.0)
    tol = args.tol or (cfg.tolerances["newtonTol"] if cfg else 1e-10)
    try:
        res = analysis.solve_equilibrium(params, alpha, seed, tol=tol)
    except ValueError as exc:
        raise ConfigError("seed", str(exc)) from None
    _print_json(
        {
            "alpha": alpha,
            "point": [float(v) for v in res.point],
            "residual_norm": res.residual_norm,
            "spectral_radius": res.spectral_radius,
            "stable": res.stable,
            "iterations": res.iterations,
        }
    )
    return EXIT_OK


def cmd_bifurcate(args) -> int:
    cfg = _load(args)
    if cfg.bifurcation is None:
        raise ConfigError("bifurcation", "missing section")
    b = cfg.bifurcation
    br = analysis.bifurcation_bisect(
        cfg.params, CoupledState(cfg.P0, cfg.R0), b.alpha_lo, b.alpha_hi, b.resolution, _classify_opts(cfg)
    )
    _print_json(
        {
            "alpha_lo": br.alpha_lo,
            "alpha_hi": br.alpha_hi,
            "class_lo": br.class_lo,
            "class_hi": br.class_hi,
            "alpha_star": br.alpha_star,
            "width": br.width,
        }
    )
    return EXIT_OK


def cmd_atlas(args) -> int:
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError("sweep", "missing section")
    sw = cfg.sweep
    seeds = [CoupledState(s[:2], s[2:]) for s in sw.seeds]
    if sw.grid is not None:
        seeds += atlas.seed_grid(sw.grid["P1"], sw.grid["P2"], sw.grid["R0"])
    if not seeds:
        seeds = [CoupledState(cfg.P0, cfg.R0)]
    spec = atlas.SweepSpec(
        params=cfg.params,
        alpha_range=atlas.AlphaRange(sw.alpha_lo, sw.alpha_hi, sw.count),
        seeds=tuple(seeds),
        classify_opts=_classify_opts(cfg),
        workers=args.workers or atlas.default_workers(),
    )
    records = atlas.run_sweep(spec)
    _emit(formats.write_atlas_jsonl(records), args.out or cfg.outputs.get("atlas"))
    return EXIT_OK


def cmd_render(args) -> int:
    traj = formats.read_trajectory_csv(Path(args.input).read_bytes())
    eq = _vector_arg(args.equilibrium, "--equilibrium") if args.equilibrium else None
    if eq is not None and len(eq) != 4:
        raise ConfigError("--equilibrium", "expected 4 comma-separated values P1,P2,R1,R2")
    doc = svg.render_phase_svg(traj, plane=args.plane, equilibrium=eq, transient=args.transient)
    _emit(doc.encode("utf-8"), args.out)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--alpha", type=float, help="override the coupling strength")
    common.add_argument("--steps", type=int, help="override the step count")
    common.add_argument("--out", metavar="PATH", help="output file ('-' for stdout)")
    common.add_argument("--tol", type=float, help="solver / iteration tolerance")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="conflict-volterra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="trajectory CSV (+ optional SVG)")
    p.add_argument("--svg", metavar="PATH", help="also write a phase portrait")
    p.add_argument("--plane", choices=sorted(svg.PLANES), default="p1p2")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("conflict", parents=[common], help="iterate the pure conflict composition")
    p.add_argument("--p", help="comma-separated stochastic vector")
    p.add_argument("--r", help="comma-separated stochastic vector")
    p.set_defaults(func=cmd_conflict)

    p = sub.add_parser("equilibrium", parents=[common], help="Newton solve for a fixed point of F")
    p.add_argument("--seed", help="P1,P2,R1,R2 starting point")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("bifurcate", parents=[common], help="bisect alpha on a change of attractor")
    p.set_defaults(func=cmd_bifurcate)

    p = sub.add_parser("atlas", parents=[common], help="sweep (alpha, seed) cells to JSONL")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${atlas.THREADS_ENV} or 1)")
    p.set_defaults(func=cmd_atlas)

    p = sub.add_parser("render", parents=[common], help="trajectory CSV to SVG phase portrait")
    p.add_argument("input", help="trajectory CSV written by 'simulate'")
    p.add_argument("--plane", choices=sorted(svg.PLANES), default="p1p2")
    p.add_argument("--transient", type=int, default=0, help="drop this many leading states")
    p.add_argument("--equilibrium", help="P1,P2,R1,R2 marker")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, ConflictVolterraError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
