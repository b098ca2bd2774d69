"""Command-line front end: ``bridgestop {beta,value,paths,verify}``.

Exit codes: 0 success, 1 verification failure, 2 usage/config error,
3 numerical fault.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import mc, svg
from .curves import CurveError, CurveSpec, curve_from_options, validate
from .freeboundary import ALPHA_MAX, BoundaryError, beta_sweep, boundary_solution, sweep_csv
from .process import ExactStepper, ModelParams, PathGrid, mean_var, path_normals, paths_csv, uniform_grid
from .specfun import SpecialFunctionError
from .valuefn import ValueContext, stop_region, value

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_SCALES = (0.5, 0.75, 1.0, 1.25, 1.5)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    alpha: Optional[float]
    curve: dict
    x: float
    t: float
    n_paths: int
    n_steps: int
    seed: int
    format: str
    out: Optional[str]


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridgestop",
        description="Optimal stopping of view bridges: barrier constant, value function, simulation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, formats: Sequence[str]) -> None:
        p.add_argument("--format", choices=formats, default=formats[0])
        p.add_argument("--out", help="output file (default: stdout)")

    def model(p: argparse.ArgumentParser) -> None:
        p.add_argument("--alpha", type=float, required=True)
        p.add_argument("--curve", choices=["sqrt", "power", "linear", "file"], default="sqrt")
        p.add_argument("--curve-scale", type=float,
                       help="curve scale c; for --curve sqrt defaults to beta(alpha), otherwise 1")
        p.add_argument("--curve-exp", type=float, help="exponent p of the power family")
        p.add_argument("--curve-file", help="CSV file with header t,gamma")
        p.add_argument("--gamma-final", type=float, default=0.0)

    p = sub.add_parser("beta", help="barrier constant beta(alpha)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-min", type=float)
    p.add_argument("--alpha-max", type=float)
    p.add_argument("--points", type=int, default=30)
    common(p, ["csv", "json", "svg"])

    p = sub.add_parser("value", help="value function V*(x, t)")
    model(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    common(p, ["csv", "json"])

    p = sub.add_parser("paths", help="simulate paths with mean +/- 1 sd band and barrier")
    model(p)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--paths", type=int, default=4)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    common(p, ["csv", "json", "svg"])

    p = sub.add_parser("verify", help="Monte Carlo check of the optimal barrier")
    model(p)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--scales", type=_float_list, default=list(DEFAULT_SCALES))
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--steps", type=int, default=4000)
    p.add_argument("--seed", type=int, default=0)
    common(p, ["csv", "json"])
    return parser


def _check_alpha(alpha: float) -> None:
    if not (math.isfinite(alpha) and 0 <= alpha <= ALPHA_MAX):
        raise UsageError(f"--alpha must lie in [0, {ALPHA_MAX}]")


def _curve(args: argparse.Namespace, beta: float) -> CurveSpec:
    scale = args.curve_scale
    if scale is None and args.curve != "file":
        scale = beta if args.curve == "sqrt" else 1.0
    try:
        curve = curve_from_options(args.curve, scale, args.curve_exp, args.curve_file, args.gamma_final)
    except (CurveError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    problems = validate(curve)
    if problems:
        raise UsageError("invalid curve: " + "; ".join(problems))
    return curve


def _config(args: argparse.Namespace, curve: Optional[CurveSpec]) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        alpha=getattr(args, "alpha", None),
        curve=curve.describe() if curve is not None else {},
        x=getattr(args, "x", 0.0),
        t=getattr(args, "t", 0.0),
        n_paths=getattr(args, "paths", 0),
        n_steps=getattr(args, "steps", 0),
        seed=getattr(args, "seed", 0),
        format=args.format,
        out=args.out,
    )


def _json(config: RunConfig, results, diagnostics) -> str:
    doc = {"config": asdict(config), "results": results, "diagnostics": diagnostics}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _model(args: argparse.Namespace) -> tuple[ModelParams, CurveSpec]:
    _check_alpha(args.alpha)
    beta = boundary_solution(args.alpha).beta
    curve = _curve(args, beta)
    return ModelParams(alpha=args.alpha, beta=beta, curve=curve), curve


# --- beta -------------------------------------------------------------------

def beta_chart(solutions) -> str:
    sweep = sorted(solutions, key=lambda s: s.alpha)
    if sweep[0].alpha != 0.0:
        sweep.insert(0, boundary_solution(0.0))
    b1 = boundary_solution(1.0).beta
    chart = svg.Chart(
        title="Barrier constant beta as a function of alpha",
        xlabel="alpha",
        ylabel="beta(alpha)",
        series=[svg.Series([s.alpha for s in sweep], [s.beta for s in sweep], color="#000000")],
        markers=[
            svg.Marker(0.0, 1.0, "beta(0) = 1"),
            svg.Marker(1.0, b1, f"beta(1) = {b1:.6f}"),
        ],
    )
    return svg.render(chart)


def cmd_beta(args: argparse.Namespace) -> tuple[str, int]:
    ranged = args.alpha_min is not None or args.alpha_max is not None
    if ranged == (args.alpha is not None):
        raise UsageError("give either --alpha or --alpha-min/--alpha-max")
    if ranged:
        if args.alpha_min is None or args.alpha_max is None:
            raise UsageError("--alpha-min and --alpha-max go together")
        if args.points < 2:
            raise UsageError("--points must be at least 2")
        if not (0 <= args.alpha_min < args.alpha_max):
            raise UsageError("need 0 <= --alpha-min < --alpha-max")
        _check_alpha(args.alpha_max)
        alphas = np.linspace(args.alpha_min, args.alpha_max, args.points)
    else:
        _check_alpha(args.alpha)
        alphas = [args.alpha]
    sols = beta_sweep(alphas)
    if args.format == "csv":
        return sweep_csv(sols), EXIT_OK
    if args.format == "svg":
        return beta_chart(sols), EXIT_OK
    results = [
        {"alpha": s.alpha, "beta": s.beta, "x_alpha": s.x_alpha, "residual": s.residual}
        for s in sols
    ]
    diag = {"max_abs_residual": max(abs(s.residual) for s in sols)}
    return _json(_config(args, None), results, diag), EXIT_OK


# --- value ------------------------------------------------------------------

def cmd_value(args: argparse.Namespace) -> tuple[str, int]:
    params, curve = _model(args)
    if not 0 <= args.t <= 1:
        raise UsageError("--t must lie in [0, 1]")
    ctx = ValueContext(params.alpha, curve, beta=params.beta)
    v = value(ctx, args.x, args.t) if args.t < 1 else max(args.x, curve.gamma_final)
    region = "stop" if stop_region(ctx, args.x, args.t) else "continue"
    if args.format == "csv":
        return f"x,t,value,region\n{args.x!r},{args.t!r},{v!r},{region}\n", EXIT_OK
    results = {"value": v, "region": region, "barrier": float(curve.gamma(args.t)), "beta": params.beta}
    diag = {"terminal_convention": args.t == 1.0}
    return _json(_config(args, curve), results, diag), EXIT_OK


# --- paths ------------------------------------------------------------------

def simulate_figure_paths(params: ModelParams, x: float, t: float, count: int, n_steps: int, seed: int):
    grid = uniform_grid(t, n_steps)
    stepper = ExactStepper(params, grid, t)
    values = stepper.paths(x, path_normals(seed, 0, count, n_steps))
    paths = [PathGrid(times=grid, values=v) for v in values]
    mv = [mean_var(params, x, t, float(s)) for s in grid]
    means = np.array([m for m, _ in mv])
    sds = np.sqrt([v for _, v in mv])
    return grid, paths, means, sds


def paths_chart(params: ModelParams, grid, paths, means, sds) -> str:
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    chart = svg.Chart(
        title=f"Simulated paths, alpha = {params.alpha:g}",
        xlabel="s",
        ylabel="X_s",
        bands=[svg.Band(grid, means - sds, means + sds)],
        series=[svg.Series(grid, p.values, color=palette[i % len(palette)], width=1.0)
                for i, p in enumerate(paths)]
        + [svg.Series(grid, params.curve.gamma(grid), color="#000000", width=2.0)],
    )
    return svg.render(chart)


def cmd_paths(args: argparse.Namespace) -> tuple[str, int]:
    params, curve = _model(args)
    if args.paths < 1:
        raise UsageError("--paths must be at least 1")
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if not 0 <= args.t < 1:
        raise UsageError("--t must lie in [0, 1)")
    grid, paths, means, sds = simulate_figure_paths(params, args.x, args.t, args.paths, args.steps, args.seed)
    if args.format == "csv":
        return paths_csv(paths), EXIT_OK
    if args.format == "svg":
        return paths_chart(params, grid, paths, means, sds), EXIT_OK
    results = {
        "times": grid.tolist(),
        "paths": [p.values.tolist() for p in paths],
        "mean": means.tolist(),
        "std": sds.tolist(),
        "barrier": np.asarray(curve.gamma(grid)).tolist(),
    }
    diag = {"pinned": all(p.values[-1] == curve.gamma_final for p in paths)}
    return _json(_config(args, curve), results, diag), EXIT_OK


# --- verify -----------------------------------------------------------------

def cmd_verify(args: argparse.Namespace) -> tuple[str, int]:
    params, curve = _model(args)
    if not 0 <= args.t < 1:
        raise UsageError("--t must lie in [0, 1)")
    if args.paths < 100 or args.steps < 100:
        raise UsageError("--paths and --steps must be at least 100")
    scales = sorted(set(args.scales) | {1.0})
    if any(not c > 0 for c in scales):
        raise UsageError("--scales must be positive")
    rows = mc.optimality_scan(params, args.x, args.t, scales, args.paths, args.steps, args.seed)
    report = mc.verify_value(params, args.x, args.t, args.paths, args.steps, args.seed)
    dominant = mc.dominance_ok(rows)
    code = EXIT_OK if dominant and not report.flagged else EXIT_VERIFY
    if args.format == "csv":
        return mc.scan_csv(rows), code
    results = {
        "scan": [
            {"c": r.scale, **asdict(r.estimate), "diff_vs_optimal": r.diff_vs_optimal,
             "paired_se": r.paired_se}
            for r in rows
        ],
        "verify": {
            "mc": asdict(report.mc),
            "analytic": report.analytic,
            "z_score": report.z_score if math.isfinite(report.z_score) else str(report.z_score),
            "bias_margin": report.bias_margin,
        },
    }
    diag = {"dominance_ok": dominant, "value_flagged": report.flagged}
    return _json(_config(args, curve), results, diag), code


COMMANDS = {"beta": cmd_beta, "value": cmd_value, "paths": cmd_paths, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        text, code = COMMANDS[args.subcommand](args)
    except UsageError as exc:
        print(f"bridgestop {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecialFunctionError, BoundaryError, FloatingPointError) as exc:
        print(f"bridgestop {args.subcommand}: numerical fault: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
