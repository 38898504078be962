"""Command-line harness: run one algorithm, compare several, or benchmark
the per-iteration subproblems.

Exit codes: 0 success, 2 configuration or validation error, 3 numeric
failure during a run.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .baselines import run_defw, run_discretized_cg, run_projected
from .config import BenchConfig, ConfigError, ExperimentConfig, load_bench, load_experiment
from .dynamics import SimulationError, initial_rows, simulate, validate_run_inputs
from .graphs import GraphValidationError
from .metrics import (
    ReferenceSolveError,
    RunRecord,
    TimingResult,
    reference_solution,
    time_subproblem,
    write_timings_csv,
)
from .sets import ProjectionConvergenceError, cross_polytope, cube, L1Ball, Simplex

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _resolve_x0(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.x0 is not None:
        return cfg.x0
    return initial_rows(cfg.graph, cfg.fset, cfg.seed)


def _run_algorithm(cfg: ExperimentConfig, algorithm: str, x0, fstar: float) -> RunRecord:
    echo = {"name": cfg.name, "algorithm": algorithm, "seed": cfg.seed}
    if algorithm == "cg_ode":
        return simulate(
            cfg.graph, cfg.objective, cfg.fset, cfg.schedule, cfg.integrator,
            x0=x0, fstar=fstar, config_echo=echo,
        )
    if algorithm == "cg_discrete":
        return run_discretized_cg(
            cfg.graph, cfg.objective, cfg.fset, cfg.discrete, x0,
            fstar=fstar, config_echo=echo,
        )
    if algorithm == "defw":
        return run_defw(
            cfg.graph, cfg.objective, cfg.fset, cfg.discrete, x0,
            fstar=fstar, config_echo=echo,
        )
    if algorithm == "projected":
        return run_projected(
            cfg.graph, cfg.objective, cfg.fset, cfg.projected, x0,
            fstar=fstar, config_echo=echo,
        )
    raise ConfigError(f"unknown algorithm {algorithm!r}")


def cmd_run(args) -> int:
    cfg = load_experiment(args.config, seed_override=args.seed)
    x0 = _resolve_x0(cfg)
    validate_run_inputs(cfg.graph, cfg.objective, cfg.fset, x0)
    algorithm = cfg.algorithms[0]
    _, fstar = reference_solution(cfg.objective, cfg.fset, tol=1e-8)
    rec = _run_algorithm(cfg, algorithm, x0, fstar)
    out = Path(args.output_dir) / f"{cfg.output}_{algorithm}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    rec.write_csv(out)
    if not args.quiet:
        print(f"{cfg.name}: {algorithm} finished, "
              f"final optimality gap {rec.optimality_gap[-1]:.3e} -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_experiment(args.config, seed_override=args.seed)
    if len(cfg.algorithms) < 2:
        raise ConfigError("compare requires a config listing at least two algorithms")
    x0 = _resolve_x0(cfg)
    validate_run_inputs(cfg.graph, cfg.objective, cfg.fset, x0)
    _, fstar = reference_solution(cfg.objective, cfg.fset, tol=1e-8)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    merged_rows = []
    for algorithm in cfg.algorithms:
        rec = _run_algorithm(cfg, algorithm, x0, fstar)
        rec.write_csv(out_dir / f"{cfg.output}_{algorithm}.csv")
        for i, row in enumerate(rec.metric_rows()):
            merged_rows.append((algorithm, row[0], rec.wall_clock[i]) + row[1:])
        if not args.quiet:
            print(f"{cfg.name}: {algorithm} final gap {rec.optimality_gap[-1]:.3e}")
    merged = out_dir / f"{cfg.output}_merged.csv"
    with open(merged, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "key", "wall_clock_s", "consensus_err",
                         "tracking_err", "optimality_gap", "fw_gap"])
        for row in merged_rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    if not args.quiet:
        print(f"merged record -> {merged}")
    return EXIT_OK


def _bench_pairs(cfg: BenchConfig, dim: int):
    """(kind, set) pairs timed at one dimension for the configured family."""
    if cfg.set_kind == "box_vs_cross_polytope":
        return [("lmo", cube(cfg.radius, dim)), ("projection", cross_polytope(cfg.radius, dim))]
    if cfg.set_kind == "box":
        box = cube(cfg.radius, dim)
        return [("lmo", box), ("projection", box)]
    if cfg.set_kind == "simplex":
        s = Simplex(cfg.radius, dim)
        return [("lmo", s), ("projection", s)]
    if cfg.set_kind == "l1ball":
        s = L1Ball(cfg.radius, dim)
        return [("lmo", s), ("projection", s)]
    if cfg.set_kind == "cross_polytope":
        s = cross_polytope(cfg.radius, dim)
        return [("lmo", s), ("projection", s)]
    raise ConfigError(f"unknown bench set_kind {cfg.set_kind!r}")


def run_bench(cfg: BenchConfig) -> list[TimingResult]:
    results = []
    for dim in cfg.dims:
        probe = np.random.default_rng(cfg.probe_seed + dim).uniform(-1.5 * cfg.radius,
                                                                    1.5 * cfg.radius, size=dim)
        for kind, fset in _bench_pairs(cfg, dim):
            results.append(time_subproblem(kind, fset, probe, cfg.repeats))
    return results


def cmd_bench(args) -> int:
    cfg = load_bench(args.config)
    results = run_bench(cfg)
    out = Path(args.output_dir) / f"{cfg.output}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_timings_csv(out, results)
    if not args.quiet:
        kinds = sorted({(r.kind, r.set_name) for r in results})
        header = "subproblem".ljust(28) + "".join(f"n={d}".rjust(14) for d in cfg.dims)
        print(header)
        for kind, set_name in kinds:
            cells = []
            for d in cfg.dims:
                match = [r for r in results if r.kind == kind and r.set_name == set_name and r.dim == d]
                cells.append(f"{match[0].mean_ns / 1e6:11.3f} ms" if match else " " * 14)
            print(f"{kind} ({set_name})".ljust(28) + "".join(cells))
        print(f"timings -> {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fwnet",
        description="Simulate and benchmark projection-free multi-agent optimization dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("compare", cmd_compare), ("bench", cmd_bench)):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the experiment TOML file")
        p.add_argument("--output-dir", default=".", help="directory for CSV output")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--quiet", action="store_true")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, GraphValidationError, SimulationError) as exc:
        # SimulationError from validate_run_inputs happens before any stepping,
        # so it is a configuration problem; numeric aborts are raised during
        # runs and reported below.
        if _is_numeric_failure(exc):
            print(f"numeric failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ReferenceSolveError, ProjectionConvergenceError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _is_numeric_failure(exc: Exception) -> bool:
    return isinstance(exc, SimulationError) and "non-finite" in str(exc)


if __name__ == "__main__":
    raise SystemExit(main())
