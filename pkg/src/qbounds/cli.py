"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 computation error,
3 reproduction-suite mismatch.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import catalog, figures, robustness, scenario, su2, suite, trace_estimation, two_mode
from .bounds import BOUND_NAMES
from .errors import ConfigError, QBoundsError
from .report import ReportDocument, dumps, rows_to_csv, write_atomic

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_MISMATCH = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", help="scenario JSON file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
    p.add_argument("--dim", type=int, default=None, help="Fock truncation override")
    p.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbounds", description="Classical bounds on measurement statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (("bound", "run one scenario"), ("scan", "run a scenario over an outcome range"),
                       ("two-mode", "run a two-mode scenario"), ("sample", "scenario with finite sampling")):
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("spin", help="spin-j scenario or the spin-1/2 randomized check")
    _common(p)
    p.add_argument("--self-check", type=int, metavar="TRIALS", help="run the spin-1/2 no-violation check")

    p = sub.add_parser("efficiency", help="scan detector efficiency")
    _common(p)
    p.add_argument("--eta-step", type=float, default=0.01)
    p.add_argument("--bound-kind", choices=robustness.BOUND_KINDS, default=None)

    p = sub.add_parser("trace-estimate", help="estimate tr(Delta) operationally")
    _common(p)
    p.add_argument("--protocol", choices=("radial", "thermal", "both"), default="both")
    p.add_argument("--n-tc", type=float, nargs="+", default=None, help="thermal means")
    p.add_argument("--no-extrapolate", action="store_true")

    p = sub.add_parser("figure", help="write figure data")
    _common(p, config=False)
    p.add_argument("name", choices=figures.FIGURES)

    p = sub.add_parser("paper-suite", help="recompute every worked example and compare")
    _common(p, config=False)
    p.add_argument("--perturb", action="append", default=[], metavar="NAME=FACTOR",
                   help=f"scale one bound constant ({', '.join(BOUND_NAMES)})")
    p.add_argument("--only", nargs="+", choices=list(suite.GROUPS), default=None)
    return parser


# ---------------------------------------------------------------------------
# output


def _emit(args, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
    elif not args.quiet:
        sys.stdout.write(text)


def _fmt(args, cfg: scenario.ScenarioConfig | None) -> str:
    if args.format:
        return args.format
    if cfg is not None:
        return cfg.output.get("format", "json")
    return "json"


def _need_config(args) -> scenario.ScenarioConfig:
    if not args.config:
        raise ConfigError("--config is required for this command", "config")
    return scenario.load_config(args.config)


def _seed(args, cfg) -> int | None:
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "seed")
        return args.seed
    if cfg is not None and cfg.sampling is not None:
        return cfg.sampling.get("seed", 0)
    return None


def _document(command: str, cfg, results, env, summary) -> ReportDocument:
    return ReportDocument(command, cfg.echo() if cfg else {}, results, env, summary)


# ---------------------------------------------------------------------------
# commands


def cmd_scenario(args) -> int:
    cfg = _need_config(args)
    if args.command == "scan" and "range" not in cfg.measurement:
        raise ConfigError("scan needs measurement.range", "measurement.range")
    if args.command == "two-mode" and cfg.domain != "two_mode":
        raise ConfigError("two-mode needs a two-mode state family", "state.family")
    if args.command == "sample" and cfg.sampling is None:
        raise ConfigError("sample needs a sampling block", "sampling")
    if args.command == "bound" and cfg.domain == "spin":
        raise ConfigError("use the spin command for spin families", "state.family")
    if args.dim is not None and args.dim < 2:
        raise ConfigError("--dim must be at least 2", "dim")
    results, env, summary = scenario.run_scenario(cfg, args.dim, _seed(args, cfg))
    doc = _document(args.command, cfg, results, env, summary)
    _emit(args, doc.to_csv() if _fmt(args, cfg) == "csv" else doc.to_json())
    return EXIT_OK


def cmd_spin(args) -> int:
    if args.self_check is not None:
        seed = args.seed if args.seed is not None else 0
        check = su2.spin_half_no_violation_check(args.self_check, seed)
        row = {
            "trials": check.trials, "seed": check.seed, "state_violations": check.state_violations,
            "measurement_violations": check.measurement_violations, "max_state_ratio": check.max_state_ratio,
            "max_measurement_ratio": check.max_measurement_ratio,
            "numeric_crosscheck_max_dev": check.numeric_crosscheck_max_dev, "passed": check.passed,
        }
        doc = ReportDocument("spin", {"self_check": args.self_check}, [row], {"seed": seed},
                             {"passed": check.passed})
        _emit(args, doc.to_csv() if _fmt(args, None) == "csv" else doc.to_json())
        return EXIT_OK
    cfg = _need_config(args)
    if cfg.domain != "spin":
        raise ConfigError("spin needs a spin state family", "state.family")
    results, env, summary = scenario.run_scenario(cfg, None, _seed(args, cfg))
    doc = _document("spin", cfg, results, env, summary)
    _emit(args, doc.to_csv() if _fmt(args, cfg) == "csv" else doc.to_json())
    return EXIT_OK


def cmd_efficiency(args) -> int:
    cfg = _need_config(args)
    if cfg.domain != "single_mode":
        raise ConfigError("efficiency scans apply to single-mode states", "state.family")
    if "range" in cfg.measurement:
        raise ConfigError("efficiency scans take a single outcome", "measurement.range")
    imp = cfg.imperfection or {}
    kind = args.bound_kind or imp.get("bound_kind") or ("state" if cfg.test_kind == "state_test" else "ideal_povm")
    if "eta_grid" in imp:
        grid = np.asarray(imp["eta_grid"], dtype=float)
    else:
        if not 0 < args.eta_step <= 1:
            raise ConfigError("--eta-step must lie in (0, 1]", "eta_step")
        grid = np.round(np.arange(1, int(round(1 / args.eta_step)) + 1) * args.eta_step, 10)
    state = scenario._build(catalog.STATE_FAMILIES, cfg.state, "state", args.dim)
    povm = scenario._build(catalog.POVM_FAMILIES, cfg.measurement, "measurement", args.dim)
    reps = robustness.efficiency_scan(state, povm, grid, kind)
    rows = [{"eta": float(e), **r.to_dict()} for e, r in zip(grid, reps)]
    window = robustness.efficiency_violation_window(state, povm, kind)
    summary = {"bound_kind": kind, "violation_window": list(window) if window else None}
    doc = ReportDocument("efficiency", cfg.echo(), rows,
                         scenario.environment([state.dim, catalog.as_operator(povm).dim]), summary)
    _emit(args, doc.to_csv() if _fmt(args, cfg) == "csv" else doc.to_json())
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = _need_config(args)
    if cfg.domain != "single_mode":
        raise ConfigError("trace estimation applies to single-mode POVM elements", "measurement.family")
    povm = scenario._build(catalog.POVM_FAMILIES, cfg.measurement, "measurement", args.dim)
    try:
        op = catalog.as_operator(povm)
    except TypeError as exc:
        raise ConfigError("trace estimation needs a discrete POVM element", "measurement.family") from exc
    row: dict = {"outcome": cfg.measurement["family"], "direct_trace": op.trace()}
    if args.protocol in ("radial", "both"):
        row["radial"] = trace_estimation.trace_via_radial(povm)
    if args.protocol in ("thermal", "both"):
        extrapolate = not args.no_extrapolate
        ns = tuple(args.n_tc) if args.n_tc else (trace_estimation.ThermalProtocolConfig().n_tc_values
                                                 if extrapolate else (100.0,))
        est = trace_estimation.trace_via_thermal(povm, trace_estimation.ThermalProtocolConfig(ns, extrapolate))
        row["thermal_n_tc"] = list(est.n_tc_values)
        row["thermal_ratios"] = list(est.ratios)
        row["thermal"] = est.value
    doc = ReportDocument("trace-estimate", cfg.echo(), [row], scenario.environment([op.dim]), {})
    _emit(args, doc.to_csv() if _fmt(args, cfg) == "csv" else doc.to_json())
    return EXIT_OK


def cmd_figure(args) -> int:
    rows = figures.figure_rows(args.name)
    if (args.format or "csv") == "csv":
        text = rows_to_csv(rows)
    else:
        text = dumps({"figure": args.name, "rows": rows})
    _emit(args, text)
    return EXIT_OK


def _parse_perturb(items: list[str]) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, factor = item.partition("=")
        if not sep or name not in BOUND_NAMES:
            raise ConfigError(f"--perturb expects NAME=FACTOR with NAME in {BOUND_NAMES}", "perturb")
        try:
            out[name] = float(factor)
        except ValueError as exc:
            raise ConfigError(f"bad factor {factor!r}", "perturb") from exc
    return out


def cmd_suite(args) -> int:
    outcome = suite.run_suite(args.only, _parse_perturb(args.perturb))
    if args.format == "json" or (args.out and args.format is None and args.out.endswith(".json")):
        text = dumps({"passed": outcome.passed, "checks": [r.to_dict() for r in outcome.results]})
    elif args.format == "csv":
        text = rows_to_csv([r.to_dict() for r in outcome.results])
    else:
        text = suite.format_table(outcome) + "\n"
    _emit(args, text)
    if not outcome.passed:
        names = ", ".join(f"{r.group}.{r.name}" for r in outcome.failures)
        sys.stderr.write(f"paper-suite: {len(outcome.failures)} mismatch(es): {names}\n")
        return EXIT_MISMATCH
    return EXIT_OK


COMMANDS = {
    "bound": cmd_scenario,
    "scan": cmd_scenario,
    "two-mode": cmd_scenario,
    "sample": cmd_scenario,
    "spin": cmd_spin,
    "efficiency": cmd_efficiency,
    "trace-estimate": cmd_trace,
    "figure": cmd_figure,
    "paper-suite": cmd_suite,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        sys.stderr.write(f"config error{where}: {exc}\n")
        return EXIT_CONFIG
    except QBoundsError as exc:
        sys.stderr.write(f"computation error in {exc.module}: {exc}\n")
        return EXIT_COMPUTE
    except (ArithmeticError, ValueError, KeyError) as exc:
        sys.stderr.write(f"computation error: {exc}\n")
        return EXIT_COMPUTE
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
