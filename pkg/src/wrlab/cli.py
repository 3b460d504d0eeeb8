"""Command-line front end.

Subcommands: analyze, power {yu|mao}, samplesize {yu|mao|precision}, ranksim,
simulate, calibrate {weibull|exponential}. All numeric output uses 6
significant digits; all stochastic commands take --seed and default to a
fixed constant, so bare invocations are reproducible.

Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import design, engine, io, ranksim
from .core import tally_unmatched, win_odds, win_ratio
from .datagen import exponential_scale_from_dropout, weibull_scale_from_survival
from .errors import DatasetFormatError, InvalidInputError, WrlabError
from .inference import (bootstrap_wr, infer_phi, phi_win, score_test,
                        wald_test_log_wr, yu_wald_test)

DEFAULT_SEED = 123456789


def _fmt(x: float) -> str:
    if x is None:
        return "-"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _threads_default() -> int:
    env = os.environ.get("WRLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def _parse_floats(raw: str) -> list[float]:
    try:
        return [float(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise InvalidInputError(f"cannot parse float list {raw!r}") from None


def _cmd_analyze(args: argparse.Namespace) -> int:
    hierarchy = io.read_hierarchy(args.hierarchy)
    records = io.read_dataset(args.data, hierarchy)
    stats = tally_unmatched(records, hierarchy)
    lines = []
    lines.append(f"patients: T={stats.n_treatment} C={stats.n_control}")
    lines.append(f"pairs (unmatched): {stats.n_pairs}")
    lines.append(f"wins: {stats.n_win}  losses: {stats.n_loss}  ties: {stats.n_tie}")
    lines.append("decided at level:")
    informative = max(stats.n_informative, 1)
    for k, spec in enumerate(hierarchy.levels):
        count = stats.decided_at_level.get(k, 0)
        lines.append(f"  {k + 1} {spec.name}: {count} ({_fmt(count / informative)} of decided)")
    lines.append(f"win ratio: {_fmt(win_ratio(stats))}")
    lines.append(f"win odds: {_fmt(win_odds(stats))}")
    lines.append(f"phi_win: {_fmt(phi_win(stats))}")
    lines.append(f"inference (alpha={_fmt(args.alpha)}):")
    header = f"  {'method':<24} {'estimate':>10} {'ci_low':>10} {'ci_high':>10} {'z':>10} {'p':>10}"
    lines.append(header)
    results = [infer_phi(stats, args.alpha, "wald"), infer_phi(stats, args.alpha, "wilson")]
    try:
        results.append(wald_test_log_wr(stats, alpha=args.alpha))
        results.append(yu_wald_test(stats, alpha=args.alpha))
    except WrlabError as exc:
        lines.append(f"  (log-scale Wald inference unavailable: {exc})")
    if args.bootstrap:
        results.append(bootstrap_wr(records, hierarchy, b=args.bootstrap,
                                    alpha=args.alpha, seed=args.seed))
    for r in results:
        lines.append(f"  {r.method:<24} {_fmt(r.estimate):>10} {_fmt(r.ci[0]):>10} "
                     f"{_fmt(r.ci[1]):>10} {_fmt(r.z):>10} {_fmt(r.p_value):>10}")
    try:
        score = score_test(records, hierarchy)
        lines.append(f"score test: z={_fmt(score.statistic)} p={_fmt(score.p_value)}")
    except WrlabError as exc:
        lines.append(f"score test unavailable: {exc}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_power(args: argparse.Namespace) -> int:
    if args.method == "yu":
        if args.n_grid or args.wr_grid or args.p_tie_grid:
            if not (args.n_grid and args.wr_grid and args.p_tie_grid):
                raise InvalidInputError("tie-sensitivity mode needs --n-grid, --wr-grid "
                                        "and --p-tie-grid together")
            rows = design.tie_sensitivity_table(_parse_floats(args.n_grid),
                                                _parse_floats(args.wr_grid),
                                                _parse_floats(args.p_tie_grid), args.alpha)
            lines = ["n_total,wr,p_tie,power"]
            lines += [f"{_fmt(r['n_total'])},{_fmt(r['wr'])},{_fmt(r['p_tie'])},{_fmt(r['power'])}"
                      for r in rows]
            _emit("\n".join(lines) + "\n", args.out)
            return 0
        power = design.yu_power(args.wr, args.n_total, args.p_t, args.p_tie, args.alpha,
                                "one-sided" if args.one_sided else "two-sided",
                                "symmetric" if args.symmetric else "as-written")
    else:
        power = design.mao_power(args.n_total, args.wr, args.xi0_sq, args.w0,
                                 args.p_c, args.alpha)
    _emit(f"power: {_fmt(power)}\n", args.out)
    return 0


def _cmd_samplesize(args: argparse.Namespace) -> int:
    if args.method == "yu":
        size = design.yu_sample_size(args.wr, args.power, args.p_t, args.p_tie, args.alpha,
                                     "one-sided" if args.one_sided else "two-sided")
    elif args.method == "mao":
        size = design.mao_sample_size(args.wr, args.power, args.xi0_sq, args.w0,
                                      args.p_c, args.alpha)
    else:
        size = design.precision_sample_size(args.width, args.p_t, args.p_tie, args.alpha)
    lines = [f"n_total_unrounded: {_fmt(size.unrounded)}",
             f"n_treatment: {size.n_treatment}",
             f"n_control: {size.n_control}",
             f"n_total: {size.total}"]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_ranksim(args: argparse.Namespace) -> int:
    phis = tuple(_parse_floats(args.phi))
    cfg = ranksim.RankSimConfig(n_t=args.n_t, n_c=args.n_c, phi_win_per_level=phis,
                                tie_prob_level1=args.tie_prob, n_bootstrap=args.bootstrap,
                                n_iterations=args.iterations, alpha=args.alpha,
                                seed=args.seed)
    result = ranksim.ranksim_power(cfg)
    if args.format == "json":
        _emit(engine.results_to_json([result]), args.out)
    else:
        _emit(engine.results_to_csv([result]), args.out)
    return 0


def _grid_from_config(path: str) -> tuple[list[engine.Scenario], int | None]:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"{path}: invalid JSON: {exc}") from None
    if payload.get("schema") != "wrlab/grid-v1":
        raise DatasetFormatError(f"{path}: expected schema 'wrlab/grid-v1', "
                                 f"got {payload.get('schema')!r}")
    iterations = payload.get("iterations")
    if "preset" in payload:
        presets = engine.study_presets()
        name = payload["preset"]
        if name not in presets:
            raise DatasetFormatError(f"{path}: unknown preset {name!r}")
        preset = presets[name]
        return list(preset.scenarios), iterations or preset.default_iterations
    dgm = payload.get("dgm")
    alpha = float(payload.get("alpha", 0.05))
    if dgm == "binary-continuous":
        scenarios = list(engine.binary_continuous_grid(
            deltas=payload.get("deltas", (0.1, 0.25, 0.5, 0.75, 1.0)),
            p_treatments=payload.get("p_treatments", (0.35, 0.4, 0.5, 0.6, 0.7)),
            orders=payload.get("orders", ("binary-first", "continuous-first")),
            n_per_arm=int(payload.get("n_per_arm", 20)),
            p_control=float(payload.get("p_control", 0.3)), alpha=alpha))
    elif dgm == "tte-composite":
        scenarios = list(engine.tte_grid(
            hazard_ratios=payload.get("hazard_ratios", (0.35, 0.5, 0.65, 0.8, 0.95)),
            n_per_arm=int(payload.get("n_per_arm", 105)), alpha=alpha))
    elif dgm == "iphak":
        scenarios = [engine.iphak_scenario(alpha=alpha)]
    else:
        raise DatasetFormatError(f"{path}: unknown dgm {dgm!r}")
    return scenarios, iterations


def _cmd_simulate(args: argparse.Namespace) -> int:
    if bool(args.preset) == bool(args.config):
        raise InvalidInputError("simulate needs exactly one of --preset or --config")
    if args.preset:
        presets = engine.study_presets()
        if args.preset not in presets:
            raise InvalidInputError(f"unknown preset {args.preset!r}; "
                                    f"choose from {sorted(presets)}")
        preset = presets[args.preset]
        scenarios = list(preset.scenarios)
        iterations = args.iterations or preset.default_iterations
    else:
        scenarios, config_iterations = _grid_from_config(args.config)
        iterations = args.iterations or config_iterations or 2500
    results = engine.run_grid(scenarios, iterations, args.seed, threads=args.threads)
    text = engine.results_to_json(results) if args.format == "json" \
        else engine.results_to_csv(results)
    _emit(text, args.out)
    n_degenerate = sum(r.n_degenerate for r in results)
    n_failures = sum(r.n_failures for r in results)
    if n_failures:
        sys.stderr.write(f"warning: {n_failures} per-iteration analysis failures\n")
    if n_degenerate:
        sys.stderr.write(f"note: {n_degenerate} degenerate win-ratio iterations\n")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    if args.distribution == "weibull":
        scale = weibull_scale_from_survival(args.time, args.survival, args.shape)
    else:
        scale = exponential_scale_from_dropout(args.time, args.dropout)
    _emit(f"scale: {_fmt(scale)}\n", args.out)
    return 0


def _add_common(parser: argparse.ArgumentParser, *, seed: bool = False,
                out: bool = True, fmt: bool = False) -> None:
    parser.add_argument("--alpha", type=float, default=0.05, help="significance level")
    if seed:
        parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                            help=f"RNG seed (default {DEFAULT_SEED})")
    if out:
        parser.add_argument("--out", help="write output to this path instead of stdout")
    if fmt:
        parser.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wrlab",
                                     description="Win-ratio trial design workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="win-ratio analysis of a dataset CSV")
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--hierarchy", required=True, help="hierarchy JSON path")
    p.add_argument("--bootstrap", type=int, default=0,
                   help="add bootstrap inference with this many replicates")
    _add_common(p, seed=True)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("power", help="closed-form power calculators")
    p.add_argument("method", choices=("yu", "mao"))
    p.add_argument("--wr", type=float, help="anticipated win ratio")
    p.add_argument("--n-total", type=float, help="total sample size")
    p.add_argument("--p-t", type=float, default=0.5, help="treatment allocation probability")
    p.add_argument("--p-tie", type=float, default=0.0, help="anticipated tie probability")
    p.add_argument("--one-sided", action="store_true")
    p.add_argument("--symmetric", action="store_true",
                   help="evaluate the power formula at |log WR|")
    p.add_argument("--xi0-sq", type=float, help="standard rank variance (mao)")
    p.add_argument("--w0", type=float, help="null win proportion (mao)")
    p.add_argument("--p-c", type=float, default=0.5, help="control allocation (mao)")
    p.add_argument("--n-grid", help="comma list of N for the tie-sensitivity table")
    p.add_argument("--wr-grid", help="comma list of WR for the tie-sensitivity table")
    p.add_argument("--p-tie-grid", help="comma list of tie probabilities for the table")
    _add_common(p)
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("samplesize", help="closed-form sample-size calculators")
    p.add_argument("method", choices=("yu", "mao", "precision"))
    p.add_argument("--wr", type=float, help="anticipated win ratio")
    p.add_argument("--power", type=float, default=0.8, help="target power")
    p.add_argument("--width", type=float, help="target total CI width for log WR (precision)")
    p.add_argument("--p-t", type=float, default=0.5)
    p.add_argument("--p-tie", type=float, default=0.0)
    p.add_argument("--one-sided", action="store_true")
    p.add_argument("--xi0-sq", type=float)
    p.add_argument("--w0", type=float)
    p.add_argument("--p-c", type=float, default=0.5)
    _add_common(p)
    p.set_defaults(func=_cmd_samplesize)

    p = sub.add_parser("ranksim", help="rank-based win-ratio power simulation")
    p.add_argument("--n-t", type=int, required=True)
    p.add_argument("--n-c", type=int, required=True)
    p.add_argument("--phi", required=True,
                   help="comma list of per-level win proportions (one or two)")
    p.add_argument("--tie-prob", type=float, default=0.0,
                   help="level-1 tie probability")
    p.add_argument("--bootstrap", type=int, default=500)
    p.add_argument("--iterations", type=int, default=1000)
    _add_common(p, seed=True, fmt=True)
    p.set_defaults(func=_cmd_ranksim)

    p = sub.add_parser("simulate", help="Monte Carlo power studies")
    p.add_argument("--preset", help="iphak | binary-continuous | ttfe-weibull")
    p.add_argument("--config", help="grid config JSON (schema wrlab/grid-v1)")
    p.add_argument("--iterations", type=int, help="override iteration count")
    p.add_argument("--threads", type=int, default=_threads_default(),
                   help="worker processes (never changes numerical output); "
                        "env WRLAB_THREADS is the fallback")
    _add_common(p, seed=True, fmt=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("calibrate", help="distribution calibration helpers")
    p.add_argument("distribution", choices=("weibull", "exponential"))
    p.add_argument("--time", type=float, required=True, help="anchor time")
    p.add_argument("--survival", type=float, help="target survival at the anchor (weibull)")
    p.add_argument("--shape", type=float, help="Weibull shape")
    p.add_argument("--dropout", type=float, help="dropout probability by the anchor (exponential)")
    _add_common(p)
    p.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "power" and args.method == "mao":
            if args.xi0_sq is None or args.w0 is None or args.wr is None or args.n_total is None:
                raise InvalidInputError("power mao needs --wr, --n-total, --xi0-sq and --w0")
        if args.command == "power" and args.method == "yu" and not args.n_grid:
            if args.wr is None or args.n_total is None:
                raise InvalidInputError("power yu needs --wr and --n-total")
        if args.command == "samplesize":
            if args.method == "precision" and args.width is None:
                raise InvalidInputError("samplesize precision needs --width")
            if args.method in ("yu", "mao") and args.wr is None:
                raise InvalidInputError(f"samplesize {args.method} needs --wr")
            if args.method == "mao" and (args.xi0_sq is None or args.w0 is None):
                raise InvalidInputError("samplesize mao needs --xi0-sq and --w0")
        if args.command == "calibrate":
            if args.distribution == "weibull" and (args.survival is None or args.shape is None):
                raise InvalidInputError("calibrate weibull needs --survival and --shape")
            if args.distribution == "exponential" and args.dropout is None:
                raise InvalidInputError("calibrate exponential needs --dropout")
        return args.func(args)
    except (InvalidInputError, DatasetFormatError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except WrlabError as exc:
        sys.stderr.write(f"runtime error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
