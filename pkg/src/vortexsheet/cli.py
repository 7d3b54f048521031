"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 refusal (inadmissible parameters or
step size), 4 numerical failure, 5 I/O error.

Settings may also come from ``--config FILE`` holding ``key=value`` lines
(``#`` starts a comment).  Keys are the long flag names with dashes or
underscores; explicit flags override the file.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .continuation import DEFAULT_MODES, DEFAULT_TOL, branch_asymptotics, certify, trace_branch
from .errors import (AliasError, BlowupError, DomainError, InadmissibleError, NewtonDivergence,
                     StepTooLarge)
from .evolution import EvolutionConfig, FlowState, Integrator
from .fourier import Grid
from .io import branch_filename, read_branch, trajectory_header, write_branch, write_table
from .linear import (admissibility, bifurcation_point, collision_check, critical_fold, det_block,
                     threshold_c, threshold_gamma, threshold_sigma)
from .steady import ParamPoint
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_REFUSED, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


class Refusal(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _sign(text: str) -> str:
    if text not in ("+", "-"):
        raise argparse.ArgumentTypeError("sign must be + or -")
    return text


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--modes", type=_positive_int, default=DEFAULT_MODES, metavar="N",
                   help="retained fold-modes (default %(default)s)")
    g.add_argument("--quad", type=_positive_int, default=None, metavar="Q",
                   help="quadrature nodes (default: smallest power of two >= 8 m N)")
    g.add_argument("--tol", type=float, default=DEFAULT_TOL, help="residual tolerance (default %(default)g)")
    g.add_argument("--out", type=Path, default=None, metavar="DIR", help="output directory")
    g.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    g.add_argument("--config", type=Path, default=None, metavar="FILE",
                   help="key=value settings; explicit flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortexsheet",
        description="Bifurcation analysis of rotating vortex sheets with surface tension.",
        epilog="Exit codes: 0 ok, 2 usage, 3 refusal, 4 numerical failure, 5 I/O.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="determinant of M_n for n = 1..nmax")
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--nmax", type=int, default=8)
    _common(p)

    for name, help_text in (("thresholds", "bifurcation thresholds and their hypotheses"),
                            ("kernel", "kernel, cokernel and transversality report")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--kind", choices=("speed", "tension", "vorticity"), required=True)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--c", type=float, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--gamma", type=float, default=None)
        _common(p)

    p = sub.add_parser("branch", help="continue a local branch")
    p.add_argument("--kind", choices=("speed", "tension", "vorticity"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sign", type=_sign, default="+")
    p.add_argument("--direction", type=int, choices=(1, -1), default=1)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--ds", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=5)
    _common(p)

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    _common(p)

    p = sub.add_parser("evolve", help="evolve a branch row and compare with its translation")
    p.add_argument("--input", type=Path, required=True, help="branch CSV")
    p.add_argument("--row", type=int, default=-1, help="row index (default: last)")
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--t-final", type=float, default=0.05)
    p.add_argument("--stride", type=_positive_int, default=10)
    _common(p)
    return parser


def _read_config(path: Path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    settings = _read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in settings.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"{args.config}: unknown setting {key!r} for '{args.command}'")
        action = actions[key]
        try:
            defaults[key] = action.type(value) if action.type else value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{args.config}: bad value for {key}: {exc}") from None
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def _emit(args, name: str, header, rows, meta=None) -> Path | None:
    if args.out is None:
        write_table(sys.stdout, header, rows, meta)
        return None
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / name
    with open(path, "w", newline="") as fh:
        write_table(fh, header, rows, meta)
    return path


def _grid(args, m: int) -> Grid:
    grid = Grid(args.quad) if args.quad else Grid.for_modes(m, args.modes)
    try:
        grid.check_resolution(m, args.modes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return grid


def cmd_spectrum(args) -> int:
    if args.nmax < 1:
        raise UsageError("--nmax must be >= 1")
    if not args.sigma > 0:
        raise UsageError("--sigma must be positive")
    params = ParamPoint(args.c, args.sigma, args.gamma)
    rows = []
    for n in range(1, args.nmax + 1):
        det = det_block(n, params)
        rows.append((n, det, math.sqrt(abs(det)), det > 0))
    _emit(args, "spectrum.csv", ["n", "detMn", "frequency_or_growth", "stable"], rows,
          {"c": args.c, "sigma": args.sigma, "gamma": args.gamma})
    return EXIT_OK


def _fixed(args, kind: str) -> dict:
    need = {"speed": ("sigma", "gamma"), "tension": ("c", "gamma"), "vorticity": ("sigma",)}[kind]
    missing = [f"--{n}" for n in need if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{kind} family needs {' '.join(missing)}")
    if "sigma" in need and not args.sigma > 0:
        raise UsageError("--sigma must be positive")
    if args.m < 1:
        raise UsageError("--m must be >= 1")
    return {n: getattr(args, n) for n in need}


def _report(kind: str, m: int, fixed: dict) -> dict:
    report: dict = {"kind": kind, "m": m, **fixed}
    if kind == "speed":
        sigma, gamma = fixed["sigma"], fixed["gamma"]
        adm = admissibility(m, sigma, gamma)
        report.update(in_S1=adm.in_S1, in_S2=adm.in_S2, m_minus=adm.m_minus, m_plus=adm.m_plus)
        report["threshold"] = {s: (v if v else repr(v))
                               for s in ("+", "-") for v in [threshold_c(m, sigma, gamma, s)]}
        probe = ParamPoint(0.0, sigma, gamma)
    elif kind == "tension":
        c, gamma = fixed["c"], fixed["gamma"]
        if m < 2:
            raise Refusal(f"tension family needs m >= 2 (got {m}); condition: m")
        report["N(c,gamma)"] = critical_fold(c, gamma)
        value = threshold_sigma(m, c, gamma)
        report["threshold"] = value if value else repr(value)
        if value:
            report["threshold_expanded_form"] = threshold_sigma(m, c, gamma, form="expanded")
        probe = ParamPoint(c, value if value else 1.0, gamma)
    else:
        sigma = fixed["sigma"]
        if m < 2:
            raise Refusal(f"vorticity family needs m >= 2 (got {m}); condition: m")
        report["threshold"] = {s: threshold_gamma(m, sigma, s) for s in ("+", "-")}
        probe = ParamPoint(0.0, sigma, 0.0)
    col = collision_check(kind, m, probe)
    report["collision"] = {"ok": col.ok, "k2": col.offending_k,
                           "k2_fraction": str(col.as_fraction) if col.as_fraction is not None else None}
    points = {}
    for sign in (("+",) if kind == "tension" else ("+", "-")):
        try:
            pt = bifurcation_point(kind, m, sign=sign, **fixed)
        except InadmissibleError as exc:
            raise Refusal(f"{exc} (condition: {exc.reason})") from None
        points[pt.sign_label] = {"value": pt.value, "kernel": list(pt.kernel),
                                 "cokernel": list(pt.cokernel), "pairing": pt.pairing,
                                 "residuals": list(pt.check())}
    report["points"] = points
    report["admissible"] = True
    return report


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return str(x)


def _print_block(data: dict) -> None:
    print(json.dumps(data, indent=2, default=_json_default))


def cmd_thresholds(args) -> int:
    fixed = _fixed(args, args.kind)
    report = _report(args.kind, args.m, fixed)
    _print_block(report)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"thresholds_{args.kind}_{args.m}.json").write_text(
            json.dumps(report, indent=2, default=_json_default) + "\n")
    return EXIT_OK


def cmd_branch(args) -> int:
    fixed = _fixed(args, args.kind)
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if not 0 < args.ds <= 0.05:
        raise UsageError("--ds must lie in (0, 0.05]")
    if args.steps * args.ds > 0.05 * (1 + 1e-12):
        raise Refusal(f"steps*ds = {args.steps * args.ds:g} exceeds the trust amplitude 0.05")
    if args.kind == "tension" and args.sign != "+":
        raise UsageError("the tension family has a single threshold; omit --sign")
    try:
        point = bifurcation_point(args.kind, args.m, sign=args.sign, **fixed)
    except InadmissibleError as exc:
        raise Refusal(f"{exc} (condition: {exc.reason})") from None
    grid = _grid(args, args.m)
    out = args.out or Path(".")
    status = "complete"
    try:
        branch = trace_branch(point, args.ds, args.steps, direction=args.direction,
                              N=args.modes, grid=grid, tol=args.tol)
    except NewtonDivergence as exc:
        branch = exc.last_good
        status = f"failed: {exc}"
        if branch is None:
            raise
    path = write_branch(branch, out)
    summary = {"file": str(path), "status": status, "kind": point.kind, "m": point.m,
               "sign": point.sign_label, "threshold": point.value,
               "kernel": list(point.kernel), "pairing": point.pairing, "steps": len(branch)}
    if len(branch) >= 3:
        asym = branch_asymptotics(branch)
        summary.update(p0_extrapolated=asym.p0_extrapolated,
                       p0_error=abs(asym.p0_extrapolated - point.value),
                       tangent_defect=asym.tangent_defect, quadratic_coefficient=asym.quadratic_fit,
                       power_law_exponent=asym.exponent)
    if len(branch):
        doubled = certify(branch)
        summary["max_residual"] = max(st.residual_norm for st in branch.steps)
        summary["max_residual_doubled_grid"] = float(doubled.max())
        summary["certified"] = bool(doubled.max() <= 10 * args.tol)
    _print_block(summary)
    return EXIT_OK if status == "complete" else EXIT_NUMERIC


def cmd_verify(args) -> int:
    checks = run_suite(args.suite, args.seed)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def cmd_evolve(args) -> int:
    record = read_branch(args.input)
    if not len(record):
        raise UsageError(f"{args.input} has no rows")
    row = args.row if args.row >= 0 else len(record) + args.row
    if not 0 <= row < len(record):
        raise UsageError(f"--row {args.row} out of range for {len(record)} rows")
    params = record.params(row)
    state = record.state(row)
    try:
        config = EvolutionConfig(args.dt, args.t_final, stride=args.stride, sigma=params.sigma,
                                 gamma=params.gamma, m=record.m, N=record.N)
    except ValueError as exc:
        raise Refusal(str(exc)) from None
    grid = Grid(args.quad) if args.quad else Grid.for_modes(record.m, record.N)
    integ = Integrator(config, params.sigma, params.gamma, record.m, record.N, grid)
    u0 = FlowState.from_sheet(state)
    rows, errors = [], []
    for t, u in integ.run(u0):
        rows.append((t, *u.vector()))
        errors.append((u - u0.shifted(params.c * t)).x_norm())
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / (Path(args.input).stem.replace("branch_", "trajectory_") + f"_row{row}.csv")
    with open(path, "w", newline="") as fh:
        write_table(fh, trajectory_header(record.N), rows,
                    {"m": record.m, "N": record.N, "c": params.c, "sigma": params.sigma,
                     "gamma": params.gamma, "dt": config.step_size, "stride": args.stride})
    _print_block({"file": str(path), "row": row, "s": float(record.s[row]), "c": params.c,
                  "t_final": args.t_final, "dt": config.step_size,
                  "max_shape_error": max(errors), "final_shape_error": errors[-1]})
    return EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "thresholds": cmd_thresholds, "kernel": cmd_thresholds,
            "branch": cmd_branch, "verify": cmd_verify, "evolve": cmd_evolve}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Refusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (NewtonDivergence, StepTooLarge, BlowupError, AliasError, DomainError) as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
