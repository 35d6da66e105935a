"""Command-line interface: ``ginifield <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric guard.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataError, GinifieldError, NumericGuard
from .field import build_plugin_context, gini_ci, lorenz_points, normal_quantile, sigma2_GI
from .indices import gini_point, gpi_point
from .io import ReportEnvelope, parse_income_csv, parse_index, write_lorenz_csv
from .montecarlo import (
    CopulaSpec,
    DistributionSpec,
    SimulationPlan,
    coverage_study,
    run_replicates,
    sample_paired,
    sample_univariate,
    variance_agreement,
)
from .sample import Grid
from .twophase import (
    build_two_phase,
    delta_gini,
    delta_gpi,
    gamma2_grid,
    ratio_inference,
    sigma2_delta_gini,
    sigma2_delta_gpi,
)

log = logging.getLogger("ginifield")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _level(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return v


def _grid_m(text: str) -> int:
    v = int(text)
    if v < 16:
        raise argparse.ArgumentTypeError("grid size must be at least 16")
    return v


def _add_input(p, pair: bool):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    if pair:
        p.add_argument("--columns", nargs=2, metavar=("COL1", "COL2"), default=["y1", "y2"],
                       help="period-1 and period-2 income columns (default: y1 y2)")
    else:
        p.add_argument("--column", default="income", help="income column (default: income)")
    p.add_argument("--nonpositive", choices=["reject", "drop"], default="reject",
                   help="what to do with rows holding a non-positive or non-numeric income")


def _add_common(p, confidence=True):
    if confidence:
        p.add_argument("--confidence", type=_level, default=0.95)
    p.add_argument("--output", help="write the report here instead of standard output")
    p.add_argument("--deterministic", action="store_true",
                   help="omit timings so identical inputs give byte-identical output")


def _add_index(p, default: str):
    p.add_argument("--index", default=default, help="gini | fgt:ALPHA | sen | kakwani:KAPPA | gpi:FILE")
    p.add_argument("--poverty-line", type=float, dest="poverty_line", help="poverty line Z > 0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ginifield", description="Gini and poverty index inference.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("gini", help="Gini index with plug-in variance and confidence interval")
    _add_input(p, pair=False)
    p.add_argument("--midrank", action="store_true", help="use (2j-1)/(2n) weights in A_n")
    _add_common(p)

    p = sub.add_parser("gpi", help="poverty index of one sample")
    _add_input(p, pair=False)
    _add_index(p, "fgt:0")
    _add_common(p, confidence=False)

    p = sub.add_parser("delta-gini", help="change of the Gini index between two periods")
    _add_input(p, pair=True)
    p.add_argument("--grid", type=_grid_m, default=256, help="grid size for the quadrature cross-check")
    _add_common(p)

    for name, text in (("delta-gpi", "change of a poverty index between two periods"),
                       ("ratio", "pro-poor ratio dJ/dGI with delta-method interval")):
        p = sub.add_parser(name, help=text)
        _add_input(p, pair=True)
        _add_index(p, "fgt:1")
        p.add_argument("--grid", type=_grid_m, default=256, help="grid size for the quadrature cross-check")
        _add_common(p)

    p = sub.add_parser("lorenz", help="empirical Lorenz curve as a CSV of (p, L)")
    _add_input(p, pair=False)
    p.add_argument("--output", help="CSV destination (default: standard output)")

    p = sub.add_parser("simulate", help="draw a synthetic income CSV")
    p.add_argument("--family", default="exponential:1", help="e.g. exponential:1, pareto:3,1, lognormal:0,1")
    p.add_argument("--family2", help="second-period law; gives columns y1,y2")
    p.add_argument("--copula", default="independence", help="independence | gaussian:RHO | clayton:THETA | comonotone")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="CSV destination (default: standard output)")

    p = sub.add_parser("validate", help="Monte Carlo check of a plug-in variance")
    p.add_argument("--target", default="sigma2_GI",
                   choices=["sigma2_GI", "sigma2_delta_gini", "sigma2_delta_gpi", "sigma2_R"])
    p.add_argument("--family", default="exponential:1")
    p.add_argument("--family2", help="second-period law (default: same as --family)")
    p.add_argument("--shift2", type=float, default=0.0, help="add this to second-period incomes")
    p.add_argument("--scale2", type=float, default=1.0, help="multiply second-period incomes by this")
    p.add_argument("--copula", default="independence")
    _add_index(p, "fgt:1")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--level", type=_level, default=0.95)
    p.add_argument("--study", choices=["variance", "coverage"], default="variance")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--replicate-csv", dest="replicate_csv", help="also write per-replicate statistics here")
    _add_common(p, confidence=False)
    return parser


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "deterministic")}


def _interval(lo, hi, level) -> dict:
    return {"lower": float(lo), "upper": float(hi), "level": float(level)}


def _cmd_gini(args):
    parsed = parse_income_csv(args.input, [args.column], args.nonpositive)
    dist = parsed.sample
    est = gini_point(dist)
    rep = sigma2_GI(build_plugin_context(dist, args.midrank))
    lo, hi = gini_ci(dist, args.confidence, rep)
    estimates = {"gini": est.value, "a_statistic": est.a_statistic, "mean": est.mean, "n": est.n,
                 "sigma2_GI": rep.sigma2, "rows_dropped": parsed.rows_dropped}
    return ReportEnvelope("gini", _config_echo(args), estimates, {"sigma2_GI": rep.terms},
                          _interval(lo, hi, args.confidence), list(parsed.warnings + rep.warnings))


def _cmd_gpi(args):
    cfg = parse_index(args.index, args.poverty_line)
    if cfg is None:
        raise UsageError("gpi needs a poverty index, not gini; use the gini command")
    parsed = parse_income_csv(args.input, [args.column], args.nonpositive)
    est = gpi_point(parsed.sample, cfg)
    estimates = {"gpi": est.value, "index": cfg.label, "poor_count": est.poor_count, "n": parsed.sample.n,
                 "rows_dropped": parsed.rows_dropped}
    return ReportEnvelope("gpi", _config_echo(args), estimates, {}, None, list(parsed.warnings))


def _grid_check(ctx, m: int) -> dict:
    grid = Grid(m)
    k = np.minimum((grid.nodes * ctx.n).astype(int), ctx.n - 1)
    value = gamma2_grid(ctx.L1_values[k], ctx.L2_values[k], ctx.copula, grid)
    return {"gamma2(L1,L2)": value}


def _two_phase(args, need_gpi: bool):
    cfg = parse_index(args.index, args.poverty_line) if need_gpi else None
    if need_gpi and cfg is None:
        raise UsageError(f"{args.command} needs a poverty index (fgt:ALPHA, sen, kakwani:KAPPA or gpi:FILE)")
    parsed = parse_income_csv(args.input, list(args.columns), args.nonpositive)
    return parsed, build_two_phase(parsed.sample, cfg)


def _cmd_delta_gini(args):
    parsed, ctx = _two_phase(args, False)
    d = delta_gini(ctx)
    rep = sigma2_delta_gini(ctx)
    half = _half(args.confidence, rep.sigma2, ctx.n)
    estimates = {"delta_gini": d, "gini1": gini_point(ctx.ctx1.dist).value, "gini2": gini_point(ctx.ctx2.dist).value,
                 "n": ctx.n, "sigma2_delta_gini": rep.sigma2, "rows_dropped": parsed.rows_dropped}
    ledgers = {"sigma2_delta_gini": rep.terms, "grid_check": _grid_check(ctx, args.grid)}
    return ReportEnvelope("delta-gini", _config_echo(args), estimates, ledgers,
                          _interval(d - half, d + half, args.confidence), list(parsed.warnings + rep.warnings))


def _half(level, s2, n):
    return normal_quantile(0.5 + level / 2.0) * float(np.sqrt(s2 / n))


def _cmd_delta_gpi(args):
    parsed, ctx = _two_phase(args, True)
    d = delta_gpi(ctx)
    rep = sigma2_delta_gpi(ctx)
    half = _half(args.confidence, rep.sigma2, ctx.n)
    estimates = {"delta_gpi": d, "index": ctx.gpi_cfg1.label, "n": ctx.n, "sigma2_delta_gpi": rep.sigma2,
                 "rows_dropped": parsed.rows_dropped}
    return ReportEnvelope("delta-gpi", _config_echo(args), estimates, {"sigma2_delta_gpi": rep.terms},
                          _interval(d - half, d + half, args.confidence), list(parsed.warnings + rep.warnings))


def _cmd_ratio(args):
    parsed, ctx = _two_phase(args, True)
    rr = ratio_inference(ctx, args.confidence)
    j = rr.joint
    estimates = {"R": rr.R, "a": rr.a, "b": rr.b, "sigma2_R": rr.sigma2_R, "delta_gpi": rr.delta_gpi,
                 "delta_gini": rr.delta_gini, "sigma2_dGI": j.sigma2_dGI, "sigma2_dGPI": j.sigma2_dGPI,
                 "cov": j.cov, "index": ctx.gpi_cfg1.label, "n": ctx.n, "rows_dropped": parsed.rows_dropped}
    ledgers = {"joint": j.terms, "grid_check": _grid_check(ctx, args.grid)}
    return ReportEnvelope("ratio", _config_echo(args), estimates, ledgers,
                          _interval(rr.ci.lower, rr.ci.upper, args.confidence), list(parsed.warnings + rr.warnings))


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="") if path else _nullclose(sys.stdout)


class _nullclose:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        return False


def _cmd_lorenz(args):
    parsed = parse_income_csv(args.input, [args.column], args.nonpositive)
    with _open_out(args.output) as fh:
        write_lorenz_csv(lorenz_points(parsed.sample), fh)
    return None


def _cmd_simulate(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    m1 = DistributionSpec.parse(args.family)
    with _open_out(args.output) as fh:
        if args.family2 is None:
            x = sample_univariate(m1, args.n, args.seed)
            fh.write("income\n")
            fh.writelines(f"{float(v)!r}\n" for v in x)
        else:
            p = sample_paired(CopulaSpec.parse(args.copula), m1, DistributionSpec.parse(args.family2),
                              args.n, args.seed)
            fh.write("y1,y2\n")
            fh.writelines(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(p.x1, p.x2))
    return None


def _cmd_validate(args):
    m1 = DistributionSpec.parse(args.family)
    if args.target == "sigma2_GI":
        marg = (m1,)
        cop = None
    else:
        m2 = DistributionSpec.parse(args.family2) if args.family2 else m1
        marg = (m1, m2.affine(args.scale2, args.shift2))
        cop = CopulaSpec.parse(args.copula)
    cfg = None
    if args.target in ("sigma2_delta_gpi", "sigma2_R"):
        cfg = parse_index(args.index, args.poverty_line)
        if cfg is None:
            raise UsageError(f"{args.target} needs a poverty index")
    plan = SimulationPlan(args.n, args.replicates, args.seed, marg, cop, args.target, cfg, args.level, args.tolerance)
    if args.replicate_csv:
        Path(args.replicate_csv).write_text(run_replicates(plan).to_csv(), encoding="utf-8")
    study = coverage_study if args.study == "coverage" else variance_agreement
    rep = study(plan)
    d = rep.as_dict()
    if args.deterministic:
        d["runtime"] = 0.0
    return ReportEnvelope("validate", _config_echo(args), d, {}, None, [])


_COMMANDS = {
    "gini": _cmd_gini,
    "gpi": _cmd_gpi,
    "delta-gini": _cmd_delta_gini,
    "delta-gpi": _cmd_delta_gpi,
    "ratio": _cmd_ratio,
    "lorenz": _cmd_lorenz,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
}


def run_command(argv=None) -> int:
    """Parse ``argv``, run the command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    t0 = time.perf_counter()
    try:
        env = _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ginifield {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"ginifield {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericGuard as exc:
        print(f"ginifield {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GinifieldError as exc:
        print(f"ginifield {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    if env is None:
        return EXIT_OK
    env.version = __version__
    env.timing = None if args.deterministic else time.perf_counter() - t0
    with _open_out(args.output) as fh:
        fh.write(env.to_json())
    return EXIT_OK


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    sys.exit(run_command())
