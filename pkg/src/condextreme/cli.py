"""Command-line interface.

Every numeric result is printed as ``name = value`` with 10 significant
digits; ``--out`` mirrors the same strings to CSV. Options can also come
from a ``--config`` file of ``key = value`` lines, with flags taking
precedence.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

from . import simgen
from .core import Bandwidths, KernelK, KernelPair, KernelQ, TauGrid, parse_covariate, read_csv, write_csv
from .csf import csf_estimate, small_ball_estimate
from .errors import EstimationError, InvalidConfiguration
from .quantile import quantile_estimate, rate_diagnostics
from .tailindex import PHI_KINDS, PhiSpec, asymptotic_variance, tail_index, variance_scan
from .weissman import extrapolate

COMMANDS = ("csf", "quantile", "tail-index", "extrapolate", "simulate", "validate",
            "variance-scan")

REQUIRED = {
    "csf": ("input", "x", "h", "y"),
    "quantile": ("input", "x", "h", "alpha"),
    "tail-index": ("input", "x", "h", "alpha", "taus"),
    "extrapolate": ("input", "x", "h", "alpha", "beta", "taus"),
    "simulate": ("n", "out"),
    "validate": ("n", "x", "h", "alpha", "replicates"),
    "variance-scan": (),
}


def fmt(value: float) -> str:
    return f"{value:.10g}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condextreme",
        description="Kernel estimation of extreme conditional quantiles and tail indices.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="file of key = value lines")
    parser.add_argument("--input", help="CSV with column y and x | x1..xp | t1..tp")
    parser.add_argument("--metric", choices=("absolute", "euclidean", "l2", "sup"))
    parser.add_argument("--x", help="point of interest, comma separated for vectors/curves")
    parser.add_argument("--y", type=float, help="response level for csf")
    parser.add_argument("--h", type=float, help="covariate bandwidth")
    parser.add_argument("--lambda", dest="lam", type=float, default=0.0,
                        help="response bandwidth (0 = indicator)")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--taus", help="comma separated decreasing levels")
    parser.add_argument("--phi", choices=PHI_KINDS, default="hill")
    parser.add_argument("--p", type=float, default=2.0)
    parser.add_argument("--theta", type=float, default=1.0)
    parser.add_argument("--kernel-k", dest="kernel_k", choices=("uniform", "bounded-linear"),
                        default="uniform")
    parser.add_argument("--kernel-q", dest="kernel_q", choices=("biweight", "triangular", "uniform"),
                        default="biweight")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", help="CSV output path")
    # generator options for simulate / validate
    parser.add_argument("--design", choices=simgen.COVARIATE_LAWS, default="uniform-scalar")
    parser.add_argument("--n", type=int)
    parser.add_argument("--dim", type=int, default=1, help="vector dimension or curve grid size")
    parser.add_argument("--family", choices=("exact-pareto", "burr"), default="exact-pareto")
    parser.add_argument("--gamma", type=float, default=None,
                        help="tail index (generator intercept, or variance-scan gamma)")
    parser.add_argument("--gamma-slope", dest="gamma_slope", type=float, default=0.0)
    parser.add_argument("--rho", type=float, default=-1.0)
    parser.add_argument("--jmax", type=int, default=15)
    return parser


def read_config(path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfiguration(f"{path}: line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_args(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        config = read_config(known.config)
        dests = {a.dest: a for a in parser._actions}
        aliases = {"lambda": "lam"}
        defaults, unknown = {}, []
        for key, raw in config.items():
            dest = aliases.get(key, key)
            action = dests.get(dest)
            if action is None or dest in ("help", "command", "config"):
                unknown.append(key)
                continue
            try:
                value = action.type(raw) if action.type else raw
            except ValueError:
                unknown.append(f"{key} (bad value {raw!r})")
                continue
            if action.choices and value not in action.choices:
                unknown.append(f"{key} (not one of {', '.join(action.choices)})")
                continue
            defaults[dest] = value
        if unknown:
            raise InvalidConfiguration("config: unusable keys: " + "; ".join(unknown))
        parser.set_defaults(**defaults)
    return parser.parse_args(argv)


def validate_args(args) -> None:
    """Collect every problem before any computation and report them together."""
    problems = [f"--{name.replace('_', '-')} is required for {args.command}"
                for name in REQUIRED[args.command] if getattr(args, name) is None]
    if args.h is not None and not args.h > 0:
        problems.append("--h must be positive")
    if args.lam < 0:
        problems.append("--lambda must be >= 0")
    if args.alpha is not None and not 0 < args.alpha < 1:
        problems.append("--alpha must lie in (0, 1)")
    if args.beta is not None and not args.beta > 0:
        problems.append("--beta must be positive")
    if args.replicates is not None and args.replicates < 2:
        problems.append("--replicates must be at least 2")
    if args.n is not None and args.n < 1:
        problems.append("--n must be positive")
    if args.gamma is not None and args.command != "variance-scan" and not args.gamma > 0:
        problems.append("--gamma must be positive")
    if args.command == "validate" and args.beta is not None and args.taus is None:
        problems.append("--taus is required to extrapolate in validate")
    for name in ("taus", "x"):
        text = getattr(args, name)
        if text is None:
            continue
        try:
            TauGrid.parse(text) if name == "taus" else parse_covariate(text)
        except InvalidConfiguration as exc:
            problems.append(f"--{name}: {exc}")
    try:
        PhiSpec(args.phi, args.p, args.theta)
    except InvalidConfiguration as exc:
        problems.append(f"--phi: {exc}")
    if problems:
        raise InvalidConfiguration("; ".join(problems))


def emit(rows, out=None, stream=None) -> None:
    stream = stream or sys.stdout
    text = [(name, fmt(value) if isinstance(value, float) else str(value))
            for name, value in rows]
    for name, value in text:
        print(f"{name} = {value}", file=stream)
    if out:
        with Path(out).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["name", "value"])
            writer.writerows(text)


def read_output_csv(path) -> dict[str, str]:
    with Path(path).open(newline="") as fh:
        return {row["name"]: row["value"] for row in csv.DictReader(fh)}


def _kernels(args) -> KernelPair:
    return KernelPair(KernelK(args.kernel_k), KernelQ(args.kernel_q))


def _model(args) -> simgen.TailModel:
    intercept = 0.5 if args.gamma is None else args.gamma
    fn = (simgen.linear(intercept, args.gamma_slope) if args.gamma_slope
          else simgen.constant(intercept))
    return simgen.TailModel(fn, family=args.family, rho=args.rho)


def _design(args) -> simgen.Design:
    return simgen.Design(args.design, args.n, args.dim)


def run(args, stream=None) -> int:
    stream = stream or sys.stdout
    command = args.command
    if command == "variance-scan":
        gamma = 1.0 if args.gamma is None else args.gamma
        table = variance_scan(gamma, args.jmax)
        best = min(table, key=lambda row: row[1])
        print("J variance", file=stream)
        for J, value in table:
            mark = "  <- minimum" if J == best[0] else ""
            print(f"{J} {fmt(value)}{mark}", file=stream)
        if args.out:
            with Path(args.out).open("w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["J", "variance"])
                writer.writerows((J, fmt(v)) for J, v in table)
        return 0

    if command == "simulate":
        ds = simgen.sample_dataset(_design(args), _model(args), args.seed)
        write_csv(ds, args.out)
        print(f"wrote {ds.n} rows to {args.out}", file=stream)
        return 0

    kernels = _kernels(args)
    bw = Bandwidths(args.h, args.lam)
    x = parse_covariate(args.x)

    if command == "validate":
        grid = TauGrid.parse(args.taus) if args.taus else TauGrid((1.0,))
        spec = PhiSpec(args.phi, args.p, args.theta)
        cfg = simgen.McConfig(
            x=tuple(x), kernels=kernels, bw=bw, alpha=args.alpha, grid=grid,
            spec=spec if args.taus else None,
            tail_grid=grid if args.taus else None,
            betas=(args.beta,) if args.beta is not None else (),
        )
        report = simgen.monte_carlo(_design(args), _model(args), cfg, args.replicates,
                                    seed=args.seed, workers=args.workers)
        print(report.summary(), file=stream)
        if args.out:
            report.to_csv(args.out)
        return 0

    ds = read_csv(args.input, metric=args.metric)
    if command == "csf":
        est = csf_estimate(ds, kernels, bw, x, args.y)
        emit([("csf", est.value), ("neighborhood_count", est.neighborhood_count),
              ("weight_sum", est.weight_sum),
              ("small_ball", small_ball_estimate(ds, x, bw.h))], args.out, stream)
    elif command == "quantile":
        est = quantile_estimate(ds, kernels, bw, x, args.alpha)
        diag = rate_diagnostics(ds, kernels, bw, x, args.alpha, est)
        emit([("quantile", est.value), ("sigma_hat", est.sigma_hat),
              ("neighborhood_count", est.neighborhood_count),
              *[(k, v) for k, v in diag.items()]], args.out, stream)
    elif command == "tail-index":
        grid = TauGrid.parse(args.taus)
        spec = PhiSpec(args.phi, args.p, args.theta)
        est = tail_index(ds, kernels, bw, x, args.alpha, grid, spec)
        sigma = quantile_estimate(ds, kernels, bw, x, args.alpha).sigma_hat
        if est.gamma_hat > 0:
            variance = asymptotic_variance(spec, est.gamma_hat, grid)
            se = sigma * math.sqrt(variance)
        else:
            variance = se = math.nan
        emit([("gamma_hat", est.gamma_hat), ("asymptotic_variance", variance),
              ("variance_factor", est.variance_factor), ("sigma_hat", sigma),
              ("standard_error", se)], args.out, stream)
    elif command == "extrapolate":
        grid = TauGrid.parse(args.taus)
        spec = PhiSpec(args.phi, args.p, args.theta)
        est = extrapolate(ds, kernels, bw, x, args.alpha, args.beta, grid, spec)
        emit([("quantile", est.value), ("anchor_quantile", est.anchor_value),
              ("gamma_hat", est.gamma_used), ("extrapolation_factor", est.extrapolation_factor),
              ("alpha", est.anchor_level), ("beta", est.target_level)], args.out, stream)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        validate_args(args)
        return run(args)
    except InvalidConfiguration as exc:
        print(f"error: InvalidConfiguration: {exc}", file=sys.stderr)
        return 2
    except EstimationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
