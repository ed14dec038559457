"""Command-line pipeline: simulate, estimate, fit, test, backtest, and figure data.

Every subcommand writes its outputs plus ``manifest.json`` into ``--out``.
The manifest holds the resolved parameters; feeding it back with
``--config manifest.json`` repeats the run bit for bit.  A config file is a
JSON object mapping option names (``bins``, ``cost_pips`` ...) to values, or a
manifest; options given on the command line take precedence.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backtest import StrategyConfig, run_strategy, volatility_matched_potential, write_report_json, write_trade_log
from .data_io import resolve_path
from .errors import DataError, DomainError, EstimationError, IntegrationError
from .fit import fit_krugman, lr_test, ratio_test, write_json
from .fixtures import FITTED_BETA, FIXTURE_SEED, FIXTURE_START, target_zone_spec
from .hindered import diffusion_profile
from .km import BinConfig, estimate, read_estimate_csv, write_estimate_csv
from .krugman import curve, solve_pasting
from .sde import (
    EURCHF_FLOOR, GBM, HinderedDiffusion, KrugmanLocal, PhysicalPotential, PowerLawVolatility,
    SimConfig, simulate,
)
from .timeseries import TEN_SECONDS, read_series_csv, write_series_csv

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3

# not part of the reproducible parameter set
_VOLATILE = {"config", "out", "threads", "data_dir", "command", "handler"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_csv(path, header, columns):
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*(np.asarray(c).tolist() for c in columns)):
            fh.write(",".join(repr(x) for x in row) + "\n")


def _write_manifest(args, inputs, outputs):
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _VOLATILE}
    manifest = {
        "tool": "targetzone",
        "version": __version__,
        "subcommand": args.command,
        "params": params,
        "seed": params.get("seed"),
        "inputs": [str(p) for p in inputs],
        "outputs": [Path(p).name for p in outputs],
    }
    path = Path(args.out) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _input(args, name="input"):
    path = resolve_path(getattr(args, name), args.data_dir)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    return path


# ---------------------------------------------------------------------------
# subcommands


_REQUIRED = {"gbm": ("vol",), "physical": ("C", "F", "vol")}


def _build_spec(args):
    model, b = args.model, args.barrier
    missing = [f"--{k}" for k in _REQUIRED.get(model, ()) if getattr(args, k) is None]
    if missing:
        raise UsageError(f"model {model} needs {' '.join(missing)}")
    if model == "gbm":
        return GBM(args.drift, args.vol)
    if model == "physical":
        return PhysicalPotential(args.C, args.F, args.vol, b)
    if model == "krugman":
        alpha = args.alpha if args.alpha is not None else args.beta**2 / 4.0
        return KrugmanLocal(alpha, args.beta, b)
    if model == "hindered":
        return HinderedDiffusion(args.beta, b)
    alpha = args.alpha if args.alpha is not None else 0.0
    return PowerLawVolatility(alpha, args.beta, args.mu, b)


def cmd_simulate(args):
    spec = _build_spec(args)
    initial = args.initial_s if args.initial_s is not None else (
        spec.s_eq if isinstance(spec, PhysicalPotential) else args.barrier
    )
    cfg = SimConfig(args.steps, args.paths, args.seed, initial, args.boundary, args.tau)
    out = _out_dir(args)
    outputs = []
    for i, series in enumerate(simulate(spec, cfg, workers=args.threads)):
        outputs.append(write_series_csv(series, out / f"series_{i:03d}.csv", args.time_format))
    return [], outputs


def cmd_estimate(args):
    src = _input(args)
    series = read_series_csv(src).subsample(args.subsample)
    rng = tuple(args.range) if args.range else None
    est = estimate(series, BinConfig(args.bins, rng, args.min_count))
    return [src], [write_estimate_csv(est, _out_dir(args) / "estimate.csv")]


def _fit_payload(est, barrier, weighted):
    above = est.select(est.s_mid > barrier)
    report = fit_krugman(above, barrier, weighted=weighted)
    rt = ratio_test(report)
    payload = report.to_dict()
    payload.update({"ratio_z": None if not rt.applicable or not math.isfinite(rt.z) else rt.z,
                    "ratio_applicable": rt.applicable})
    return payload


def cmd_fit(args):
    src = _input(args)
    payload = _fit_payload(read_estimate_csv(src), args.barrier, args.weighted)
    path = _out_dir(args) / "fit.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return [src], [path]


def cmd_lrtest(args):
    src = _input(args)
    report = lr_test(read_series_csv(src), args.barrier)
    return [src], [write_json(report, _out_dir(args) / "lrtest.json")]


def cmd_krugman_curve(args):
    p = solve_pasting(args.m, args.gamma, args.sigma, args.barrier)
    v, s, free = curve(p, n=args.points)
    path = _out_dir(args) / "krugman_curve.csv"
    _write_csv(path, ["v", "s", "free_float"], [v, s, free])
    return [], [path]


def cmd_diffusion_profile(args):
    x, d, lin = diffusion_profile(np.geomspace(args.min_gap, args.max_gap, args.points))
    path = _out_dir(args) / "diffusion_profile.csv"
    _write_csv(path, ["gap_over_R", "D_over_D0_lorentz", "linear_approx"], [x, d, lin])
    return [], [path]


def cmd_backtest(args):
    src = _input(args)
    series = read_series_csv(src).subsample(args.subsample)
    report = run_strategy(series, StrategyConfig(args.s_eq, args.cost_pips, args.position_size))
    out = _out_dir(args)
    outputs = [write_report_json(report, out / "backtest.json")]
    if args.trade_log:
        outputs.append(write_trade_log(series, report, out / "trades.csv"))
    return [src], outputs


def cmd_reproduce(args):
    """Fixture -> estimate -> fit -> LR test -> backtests -> figure data."""
    out = _out_dir(args)
    barrier = args.barrier
    spec = target_zone_spec(args.beta, barrier)
    cfg = SimConfig(args.steps, 1, args.seed, args.initial_s, "reflect", TEN_SECONDS)
    fixture = simulate(spec, cfg)[0]
    outputs = [write_series_csv(fixture, out / "fixture.csv")]

    est = estimate(fixture, BinConfig(args.bins, None, args.min_count))
    outputs.append(write_estimate_csv(est, out / "estimate.csv"))
    fit = _fit_payload(est, barrier, False)
    (out / "fit.json").write_text(json.dumps(fit, indent=2, sort_keys=True) + "\n")
    outputs.append(out / "fit.json")
    lr = lr_test(fixture, barrier)
    outputs.append(write_json(lr, out / "lrtest.json"))

    # arbitrage check on hourly paths of the naive model and the local Krugman model
    gap = float(np.mean(fixture.values) - barrier)
    physical = volatility_matched_potential(fit["beta_hat"], gap, barrier)
    n_hourly = int(args.backtest_years * 365 * 24)
    strategy = StrategyConfig(physical.s_eq, args.cost_pips)
    sharpe = {}
    for name, model, start in (("physical", physical, physical.s_eq),
                               ("krugman", spec, float(fixture.values[-1]))):
        path = simulate(model, SimConfig(n_hourly, 1, args.seed + 1, start, "reflect", 1.0))[0]
        report = run_strategy(path, strategy)
        sharpe[name] = report.sharpe
        outputs.append(write_report_json(report, out / f"backtest_{name}.json"))

    sigma = args.sigma
    gamma = 8.0 * sigma**2 / fit["beta_hat"] ** 4
    kp = solve_pasting(0.0, gamma, sigma, barrier)
    v, s, free = curve(kp)
    _write_csv(out / "krugman_curve.csv", ["v", "s", "free_float"], [v, s, free])
    x, d, lin = diffusion_profile()
    _write_csv(out / "diffusion_profile.csv", ["gap_over_R", "D_over_D0_lorentz", "linear_approx"], [x, d, lin])
    outputs += [out / "krugman_curve.csv", out / "diffusion_profile.csv"]

    summary = {
        "beta_generating": args.beta,
        "beta_hat": fit["beta_hat"],
        "beta_relative_error": abs(fit["beta_hat"] - args.beta) / args.beta,
        "ratio": fit["ratio"],
        "ratio_se": fit["ratio_se"],
        "lr_p_value": lr.p_value,
        "mu_hat": lr.mu_hat,
        "sharpe_physical": sharpe["physical"],
        "sharpe_krugman": sharpe["krugman"],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    outputs.append(out / "summary.json")
    return [], outputs


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--config", help="JSON file of option values, or a manifest")
    common.add_argument("--threads", type=int, default=1, help="maximum worker threads")
    common.add_argument("--data-dir", help="base directory for relative input paths "
                        "(default: $TARGETZONE_DATA_DIR)")

    parser = _Parser(prog="targetzone", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="integrate an SDE model")
    p.add_argument("--model", choices=["gbm", "physical", "krugman", "hindered", "power"], default="krugman")
    p.add_argument("--drift", type=float, default=0.0)
    p.add_argument("--vol", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--F", type=float)
    p.add_argument("--alpha", type=float, help="default beta**2/4 (krugman) or 0 (power)")
    p.add_argument("--beta", type=float, default=FITTED_BETA)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--barrier", type=float, default=EURCHF_FLOOR)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--seed", type=int, default=FIXTURE_SEED)
    p.add_argument("--initial-s", type=float, help="default: s_eq for physical, else the barrier")
    p.add_argument("--tau", type=float, default=TEN_SECONDS, help="step in hours")
    p.add_argument("--boundary", choices=["reflect", "clamp"], default="reflect")
    p.add_argument("--time-format", choices=["hours", "iso"], default="hours")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("estimate", parents=[common], help="binned drift/volatility estimate")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--min-count", type=int, default=10)
    p.add_argument("--subsample", type=int, default=1)
    p.add_argument("--range", type=float, nargs=2, metavar=("S_MIN", "S_MAX"))
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("fit", parents=[common], help="fit alpha, beta and sqrt(alpha)/beta")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--barrier", type=float, default=EURCHF_FLOOR)
    p.add_argument("--weighted", action="store_true", help="weight bins by their counts")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("lrtest", parents=[common], help="likelihood-ratio test of mu = 1/2")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--barrier", type=float, default=EURCHF_FLOOR)
    p.set_defaults(handler=cmd_lrtest)

    p = sub.add_parser("krugman-curve", parents=[common], help="s(v) and the free-float line")
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--barrier", type=float, default=EURCHF_FLOOR)
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(handler=cmd_krugman_curve)

    p = sub.add_parser("diffusion-profile", parents=[common], help="D(s)/D0 near a wall (Lorentz)")
    p.add_argument("--min-gap", type=float, default=1e-3, help="smallest gap/R")
    p.add_argument("--max-gap", type=float, default=1e3, help="largest gap/R")
    p.add_argument("--points", type=int, default=121)
    p.set_defaults(handler=cmd_diffusion_profile)

    p = sub.add_parser("backtest", parents=[common], help="threshold strategy with costs")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--s-eq", type=float, required=True)
    p.add_argument("--cost-pips", type=float, default=1.5)
    p.add_argument("--position-size", type=float, default=1.0)
    p.add_argument("--subsample", type=int, default=1)
    p.add_argument("--trade-log", action="store_true")
    p.set_defaults(handler=cmd_backtest)

    p = sub.add_parser("reproduce", parents=[common], help="run the whole pipeline on the fixture")
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=FIXTURE_SEED)
    p.add_argument("--beta", type=float, default=FITTED_BETA)
    p.add_argument("--barrier", type=float, default=EURCHF_FLOOR)
    p.add_argument("--initial-s", type=float, default=FIXTURE_START)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--min-count", type=int, default=10)
    p.add_argument("--cost-pips", type=float, default=1.5)
    p.add_argument("--backtest-years", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=1e-3, help="fundamental volatility for the s(v) curve")
    p.set_defaults(handler=cmd_reproduce)
    return parser


def _load_config(path):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if isinstance(data, dict) and isinstance(data.get("params"), dict):
        data = data["params"]
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = _load_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(config) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**{k: v for k, v in config.items() if k not in _VOLATILE})
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        inputs, outputs = args.handler(args)
        _write_manifest(args, inputs, outputs)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"targetzone: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"targetzone: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"targetzone: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (IntegrationError, EstimationError, ArithmeticError) as exc:
        print(f"targetzone: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
