"""Command-line front end: ``swipt {optimize,sweep,oracle,validate}``.

Exit codes: 0 success, 1 a check or oracle comparison failed, 2 the rate
floor is infeasible, 3 the iteration limit was hit, 64 usage or scenario
error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .harvester import zdc
from .io import RunManifest, design_payload, write_json, write_region_csv
from .optimizer import (InfeasibleRateError, Layout, OptimizationConfig, default_rate_grid,
                        max_rate, optimize_waveform, sweep_region)
from .oracle import OracleConfigError, monte_carlo_zdc
from .plotting import plot_region, plot_trajectory
from .scenario import InvalidScenarioError, ScenarioError, load_scenario
from .validation import run_battery
from .waveform import load_design

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_MAX_ITER = 3
EXIT_USAGE = 64

log = logging.getLogger("swipt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 is reserved for infeasibility here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run options")
    g.add_argument("--scenario", type=Path, help="scenario YAML (default: bundled WiFi-like scenario)")
    g.add_argument("--seed", type=_u64, default=0, help="master seed (default: 0)")
    g.add_argument("--out", type=Path, default=Path("."), help="output directory")
    g.add_argument("--epsilon", type=float, default=1e-6, help="relative z_DC change that stops the loop")
    g.add_argument("--imax", type=_positive_int, default=100, help="maximum GP iterations per point")
    g.add_argument("--rate-floor", type=float, default=0.0, help="rate floor in bits per OFDM symbol")
    g.add_argument("--grid", type=_positive_int, default=20, help="number of sweep points")
    g.add_argument("--wit-only", action="store_true",
                   help="optimize: drop the multisine; sweep: also compute the OFDM-only boundary")
    g.add_argument("--normalize-rate", action="store_true", help="report rates per tone")
    g.add_argument("--freeze-rho", nargs="?", type=float, const=float("nan"), default=None,
                   metavar="V", help="fix the splitting ratio (to V, or to --rho)")
    g.add_argument("--rho", type=float, default=None, help="value used by a bare --freeze-rho")
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swipt", description="SWIPT waveform optimization with a nonlinear rectenna model.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="maximize z_DC for one rate floor")
    _common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="trace the rate-energy boundary")
    _common(p)
    p.add_argument("--independent", action="store_true",
                   help="solve points independently from the default start")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="processes for --independent (default: 1)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="compare analytic z_DC with a Monte-Carlo estimate")
    _common(p)
    p.add_argument("--design", type=Path, required=True, help="design JSON written by 'optimize'")
    p.add_argument("--symbols", type=_positive_int, default=100_000, help="number of OFDM symbols")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("validate", help="run the invariant battery on a reduced scenario")
    _common(p)
    p.add_argument("--tones", type=_positive_int, default=4, help="tones kept for the battery")
    p.set_defaults(func=cmd_validate)
    return parser


def _frozen_rho(args) -> float | None:
    v = args.freeze_rho
    if v is None:
        if args.rho is not None:
            raise UsageError("--rho only takes effect together with --freeze-rho")
        return None
    if np.isnan(v):
        if args.rho is None:
            raise UsageError("--freeze-rho without a value needs --rho")
        v = args.rho
    if not 0 <= v <= 1:
        raise UsageError(f"frozen rho must lie in [0, 1], got {v}")
    return float(v)


def _setup(args):
    scenario = load_scenario(args.scenario)
    try:
        config = OptimizationConfig(epsilon=args.epsilon, i_max=args.imax, rate_floor=args.rate_floor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    overrides = {k: getattr(args, k) for k in ("epsilon", "imax", "rate_floor", "grid", "wit_only",
                                               "normalize_rate")}
    overrides["freeze_rho"] = _frozen_rho(args)
    for extra in ("symbols", "design", "tones", "independent", "workers"):
        if hasattr(args, extra):
            v = getattr(args, extra)
            overrides[extra] = str(v) if isinstance(v, Path) else v
    manifest = RunManifest(scenario=scenario.source, verb=args.verb, overrides=overrides,
                           seed=args.seed).to_dict()
    args.out.mkdir(parents=True, exist_ok=True)
    write_json(args.out / "manifest.json", manifest)
    return scenario, config, manifest


def _layout(scenario, args, power_wave=True) -> Layout:
    n, m = scenario.shape
    return Layout(n, m, power_wave=power_wave, fixed_rho=_frozen_rho(args))


def cmd_optimize(args) -> int:
    sc, config, manifest = _setup(args)
    layout = _layout(sc, args, power_wave=not args.wit_only)
    try:
        res = optimize_waveform(sc.channel, sc.rect, sc.noise, sc.budget, config, layout=layout)
    except InfeasibleRateError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        write_json(args.out / "design.json", {"manifest": manifest, "status": "infeasible",
                                              "max_rate_bits": exc.max_rate})
        return EXIT_INFEASIBLE
    payload = design_payload(res)
    payload["manifest"] = manifest
    write_json(args.out / "design.json", payload)
    plot_trajectory(res.trajectory, args.out / "trajectory.svg", manifest)
    n = sc.grid.num_tones
    rate = res.rate / n if args.normalize_rate else res.rate
    unit = "bits/tone" if args.normalize_rate else "bits"
    print(f"status={res.status} iterations={res.iterations} zdc={res.zdc:.6e} "
          f"rate={rate:.6f} {unit} rho={res.design.rho:.6f}")
    if res.status == "infeasible":
        return EXIT_INFEASIBLE
    return EXIT_OK if res.converged else EXIT_MAX_ITER


def cmd_sweep(args) -> int:
    sc, config, manifest = _setup(args)
    layout = _layout(sc, args)
    ch, noise, budget = sc.channel, sc.noise, sc.budget
    grid = default_rate_grid(ch, noise, budget, args.grid, layout)
    mode = "independent" if args.independent else "bidirectional"
    points = sweep_region(ch, sc.rect, noise, budget, grid, config, layout=layout, mode=mode,
                          workers=args.workers)
    write_region_csv(args.out / "region.csv", points, args.normalize_rate)
    comparison = None
    if args.wit_only:
        wit_layout = _layout(sc, args, power_wave=False)
        comparison = sweep_region(ch, sc.rect, noise, budget, grid, config, layout=wit_layout,
                                  mode=mode, workers=args.workers)
        write_region_csv(args.out / "region_wit_only.csv", comparison, args.normalize_rate)
    plot_region(points, args.out / "region.svg", normalize=args.normalize_rate,
                comparison=comparison, manifest=manifest)

    def rows(pts):
        return [{"rate_floor_bits": p.rate_floor, "rate_bits": p.rate, "zdc": p.zdc, "rho": p.rho,
                 "iterations": p.iterations, "status": p.status,
                 "design": p.result.design.to_dict() if p.result else None} for p in pts]

    payload = {"manifest": manifest, "max_rate_bits": max_rate(ch, noise, budget, layout),
               "points": rows(points)}
    if comparison is not None:
        payload["wit_only_points"] = rows(comparison)
    write_json(args.out / "region.json", payload)
    bad = [p for p in points if p.status != "converged"]
    for p in points:
        log.info("rate floor %.4f: %s", p.rate_floor, p.status)
    print(f"{len(points)} points, {len(bad)} not converged; wrote {args.out / 'region.csv'}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    sc, _, manifest = _setup(args)
    try:
        design = load_design(args.design)
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read design {args.design}: {exc}") from None
    if design.shape != sc.shape:
        raise UsageError(f"design is {design.shape[0]}x{design.shape[1]} but the scenario is "
                         f"{sc.shape[0]}x{sc.shape[1]}")
    analytic = zdc(design, sc.channel, sc.rect)
    try:
        rep = monte_carlo_zdc(design, sc.taps, sc.geometry, sc.grid, sc.rect, args.symbols, args.seed)
    except OracleConfigError as exc:
        raise UsageError(str(exc)) from None
    diff = rep.estimate - analytic
    deterministic = not np.any(design.s_i > 0)
    if deterministic:
        passed = abs(diff) <= 1e-6 * abs(analytic)
    else:
        passed = abs(diff) <= 3 * rep.stderr
    payload = {"manifest": manifest, "analytic_zdc": analytic, "report": rep.to_dict(),
               "difference": diff, "deterministic": deterministic, "passed": passed}
    write_json(args.out / "oracle.json", payload)
    print(f"analytic={analytic:.9e} monte_carlo={rep.estimate:.9e} stderr={rep.stderr:.3e} "
          f"{'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_FAILED


def cmd_validate(args) -> int:
    sc, config, manifest = _setup(args)
    results = run_battery(sc.channel, sc.rect, sc.noise, sc.budget, seed=args.seed,
                          tones=args.tones, config=config)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    write_json(args.out / "validate.json", {
        "manifest": manifest,
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
    })
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ScenarioError, InvalidScenarioError) as exc:
        print(f"swipt {args.verb}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
