"""Command-line interface: run, post, classic, bench.

Configuration is a flat ``key = value`` text file with ``#`` comment lines;
unknown keys are rejected with a line number and missing keys fall back to
the standard defaults. Every run writes a manifest echoing the effective
configuration, so any output directory is reproducible from its contents.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .bench import default_plan, run_bench, write_bench_csv, write_bench_markdown
from .classic import ClassicConfig, run_classic, write_dead_points_csv
from .csvio import fmt_float
from .explorer import DiffusiveSampler, RunConfig
from .levels import LevelSet
from .postprocess import (
    assign_x,
    effective_sample_size,
    evidence_error_bar,
    information,
    log_evidence,
    read_samples_csv,
    resample_posterior,
    write_results,
)
from .problems import PROBLEM_NAMES, make_problem

__all__ = ["ConfigError", "Settings", "parse_config_file", "main", "entry"]


class ConfigError(Exception):
    """Invalid run configuration; message carries the offending line."""


@dataclass
class Settings:
    """Effective configuration after defaults, file and flag resolution."""

    problem: str = "twin_gaussian"
    seed: int = 0
    particle_count: int = 1
    new_level_interval: int = 10_000
    save_interval: int = 10_000
    max_levels: int = 100
    c: float = 1_000.0
    lam: float = 10.0
    beta: float = 10.0
    likelihood_budget: int = 10_000_000
    output_dir: str = "."
    mcmc_steps: int | None = None  # classic runs; derived from budget if unset
    dimension: int | None = None  # analytic_gaussian only
    width: float | None = None  # analytic_gaussian only


def _parse_int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        value = float(text)  # accept 1e6-style counts
        if value != int(value):
            raise ValueError(f"not an integer: {text!r}")
        return int(value)


# config-file key -> (Settings attribute, parser)
_KEY_SPECS: dict[str, tuple[str, callable]] = {
    "problem": ("problem", str),
    "seed": ("seed", _parse_int),
    "particle_count": ("particle_count", _parse_int),
    "new_level_interval": ("new_level_interval", _parse_int),
    "save_interval": ("save_interval", _parse_int),
    "max_levels": ("max_levels", _parse_int),
    "C": ("c", float),
    "lambda": ("lam", float),
    "beta": ("beta", float),
    "likelihood_budget": ("likelihood_budget", _parse_int),
    "output_dir": ("output_dir", str),
    "mcmc_steps": ("mcmc_steps", _parse_int),
    "dimension": ("dimension", _parse_int),
    "width": ("width", float),
}


def parse_config_file(path: str) -> Settings:
    """Parse a flat key-value configuration file into Settings."""
    settings = Settings()
    seen: set[str] = set()
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in _KEY_SPECS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        attr, parser = _KEY_SPECS[key]
        try:
            setattr(settings, attr, parser(value))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    _validate_settings(settings, path)
    return settings


def _validate_settings(settings: Settings, path: str = "<config>") -> None:
    if settings.problem not in PROBLEM_NAMES:
        raise ConfigError(
            f"{path}: unknown problem {settings.problem!r}; "
            f"choose one of {PROBLEM_NAMES}"
        )
    if settings.problem != "analytic_gaussian" and (
        settings.dimension is not None or settings.width is not None
    ):
        raise ConfigError(
            f"{path}: dimension/width apply to analytic_gaussian only"
        )


def _load_settings(args) -> Settings:
    settings = parse_config_file(args.config) if args.config else Settings()
    if getattr(args, "seed", None) is not None:
        settings.seed = args.seed
    if getattr(args, "output_dir", None) is not None:
        settings.output_dir = args.output_dir
    return settings


def _build_problem(settings: Settings):
    return make_problem(
        settings.problem, dimension=settings.dimension, width=settings.width
    )


def _run_config(settings: Settings) -> RunConfig:
    return RunConfig(
        particle_count=settings.particle_count,
        new_level_interval=settings.new_level_interval,
        save_interval=settings.save_interval,
        max_levels=settings.max_levels,
        c=settings.c,
        lam=settings.lam,
        beta=settings.beta,
        likelihood_budget=settings.likelihood_budget,
        seed=settings.seed,
    )


_MANIFEST_ORDER = [
    "problem",
    "seed",
    "particle_count",
    "new_level_interval",
    "save_interval",
    "max_levels",
    "C",
    "lambda",
    "beta",
    "likelihood_budget",
    "output_dir",
    "mcmc_steps",
    "dimension",
    "width",
]


def write_manifest(settings: Settings, path, command: str) -> None:
    by_key = {key: attr for key, (attr, _) in _KEY_SPECS.items()}
    with open(path, "w") as fh:
        fh.write(f"# diffnest {__version__} manifest ({command})\n")
        for key in _MANIFEST_ORDER:
            value = getattr(settings, by_key[key])
            if value is None:
                continue
            fh.write(f"{key} = {value}\n")
        fh.write(f"version = diffnest {__version__}\n")


# -- subcommands -------------------------------------------------------------


def cmd_run(args) -> int:
    settings = _load_settings(args)
    problem = _build_problem(settings)
    config = _run_config(settings)
    out = settings.output_dir
    os.makedirs(out, exist_ok=True)
    sampler = DiffusiveSampler(problem, config, output_dir=out)
    result = sampler.run()
    result.levels.write_csv(os.path.join(out, "levels.csv"))
    write_manifest(settings, os.path.join(out, "run_manifest.txt"), "run")
    print(
        f"run complete: {result.steps} steps, {len(result.levels)} levels, "
        f"{len(result.samples)} saved samples -> {out}"
    )
    return 0


def _require(path: str) -> str:
    if not os.path.exists(path):
        raise ConfigError(f"missing required file {path}; run the sampler first")
    return path


def cmd_post(args) -> int:
    settings = _load_settings(args)
    out = settings.output_dir
    levels = LevelSet.read_csv(_require(os.path.join(out, "levels.csv")))
    samples = read_samples_csv(
        _require(os.path.join(out, "sample.csv")),
        _require(os.path.join(out, "sample_info.csv")),
    )
    if not samples:
        raise ConfigError(f"{out}: no saved samples to post-process")
    rng = np.random.default_rng(settings.seed)
    mean_log_z, std_log_z = evidence_error_bar(
        samples, levels, repetitions=args.repetitions, rng=rng
    )
    assignment = assign_x(samples, levels, rng)
    weights = assignment.weights
    point_log_z = log_evidence(assignment, samples)
    h = information(weights, samples, point_log_z)
    ess = effective_sample_size(weights)
    write_results(os.path.join(out, "results.txt"), mean_log_z, std_log_z, h, ess)

    count = max(1, int(round(ess)))
    indices = resample_posterior(samples, weights, count, rng)
    _write_theta_csv(
        os.path.join(out, "posterior_sample.csv"), [samples[i].theta for i in indices]
    )
    _write_pairs_csv(
        os.path.join(out, "logl_vs_logx.csv"),
        ("log_x", "log_l"),
        np.log(assignment.x),
        [s.log_l for s in samples],
    )
    n = levels.size
    _write_pairs_csv(
        os.path.join(out, "level_compression.csv"),
        ("index", "dlog_x"),
        range(n - 1),
        np.diff(levels.log_x[:n]),
        x_int=True,
    )
    _emit_plots(out, levels, samples, assignment)
    print(
        f"log_evidence = {mean_log_z:.4f} +- {std_log_z:.4f}  "
        f"information = {h:.2f}  ess = {ess:.1f}"
    )
    return 0


def _write_theta_csv(path, thetas) -> None:
    import csv as _csv

    ndim = len(thetas[0]) if thetas else 0
    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(ndim)])
        for theta in thetas:
            writer.writerow([fmt_float(v) for v in theta])


def _write_pairs_csv(path, header, xs, ys, x_int: bool = False) -> None:
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(list(header))
        for x, y in zip(xs, ys):
            writer.writerow([int(x) if x_int else fmt_float(x), fmt_float(y)])


def _emit_plots(out, levels: LevelSet, samples, assignment) -> None:
    from .svgplot import Series, render_plot

    # Particle trajectory: saved level index against save checkpoint.
    render_plot(
        os.path.join(out, "trajectory.svg"),
        [
            Series(
                range(len(samples)),
                [s.level_index for s in samples],
                mode="line",
            )
        ],
        title="Particle level trajectory",
        xlabel="save checkpoint",
        ylabel="level index",
    )
    # Per-level compression against the ideal -1 line.
    n = levels.size
    if n > 1:
        render_plot(
            os.path.join(out, "level_compression.svg"),
            [
                Series(
                    range(n - 1),
                    np.diff(levels.log_x[:n]),
                    mode="markers",
                )
            ],
            title="Estimated compression between successive levels",
            xlabel="level index",
            ylabel="d ln X",
            ref_lines_y=(-1.0,),
        )
    # Likelihood vs enclosed prior mass: level curve plus thinned samples.
    stride = max(1, math.ceil(len(samples) / 1000))
    thinned = samples[::stride]
    thinned_x = np.log(assignment.x[::stride])
    series = []
    if n > 1:
        series.append(
            Series(levels.log_x[1:n], levels.cutoff_log_l[1:n], mode="line")
        )
    series.append(
        Series(thinned_x, [s.log_l for s in thinned], mode="markers")
    )
    render_plot(
        os.path.join(out, "logl_curve.svg"),
        series,
        title="Log-likelihood vs enclosed prior mass",
        xlabel="ln X",
        ylabel="log likelihood",
    )


def cmd_classic(args) -> int:
    settings = _load_settings(args)
    problem = _build_problem(settings)
    n = settings.particle_count
    iterations = 100 * n  # run down to ln X = -100
    mcmc_steps = settings.mcmc_steps
    if mcmc_steps is None:
        mcmc_steps = max(1, settings.likelihood_budget // iterations)
    config = ClassicConfig(
        particle_count=n,
        mcmc_steps=mcmc_steps,
        iteration_count=iterations,
        seed=settings.seed,
    )
    result = run_classic(problem, config)
    out = settings.output_dir
    os.makedirs(out, exist_ok=True)
    write_dead_points_csv(result, os.path.join(out, "classic_dead.csv"))
    write_results(
        os.path.join(out, "results.txt"),
        result.log_z,
        math.sqrt(result.information / n),
        result.information,
        result.ess,
    )
    print(
        f"classic run complete: N={n}, {iterations} iterations, "
        f"{mcmc_steps} MCMC steps each; log_evidence = {result.log_z:.4f}"
    )
    return 0


def cmd_bench(args) -> int:
    settings = _load_settings(args)
    plan = default_plan(
        budget=args.budget,
        runs=args.runs,
        scale=args.scale,
        seed=settings.seed,
        full=args.full,
        problem=settings.problem,
    )
    plan.max_levels = settings.max_levels
    plan.c = settings.c
    plan.lam = settings.lam
    plan.beta = settings.beta
    results = run_bench(plan, jobs=args.jobs)
    out = settings.output_dir
    os.makedirs(out, exist_ok=True)
    write_bench_csv(results, os.path.join(out, "bench_table.csv"))
    write_bench_markdown(results, os.path.join(out, "bench_table.md"), plan.truth)
    width = max(len(r.spec.label) for r in results)
    for r in results:
        rms = "n/a" if r.rms is None else f"{r.rms:.4f}"
        theory = "-" if r.theory is None else f"{r.theory:.3f}"
        status = " [FAILED]" if r.flagged else ""
        print(f"{r.spec.label:<{width}}  rms={rms}  sqrt(H/N)={theory}{status}")
    return 0


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffnest",
        description="Diffusive nested sampling engine and benchmark tools",
    )
    parser.add_argument(
        "--version", action="version", version=f"diffnest {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--output-dir", metavar="PATH", help="override output_dir")

    p_run = sub.add_parser("run", help="execute a diffusive sampling run")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_post = sub.add_parser("post", help="post-process a finished run directory")
    common(p_post)
    p_post.add_argument(
        "--repetitions",
        "-M",
        type=int,
        default=100,
        help="randomized X assignments for the evidence error bar",
    )
    p_post.set_defaults(func=cmd_post)

    p_classic = sub.add_parser("classic", help="run the classic baseline")
    common(p_classic)
    p_classic.set_defaults(func=cmd_classic)

    p_bench = sub.add_parser("bench", help="diffusive vs classic comparison")
    common(p_bench)
    p_bench.add_argument("--runs", type=int, default=8, help="runs per method")
    p_bench.add_argument(
        "--budget", type=int, default=1_000_000, help="likelihood budget per run"
    )
    p_bench.add_argument(
        "--scale",
        type=float,
        default=0.1,
        help="shrink factor for the level/save intervals at desk scale",
    )
    p_bench.add_argument(
        "--full",
        action="store_true",
        help="reference scale: 24 runs of 1e7 evaluations, unscaled intervals",
    )
    p_bench.add_argument("--jobs", type=int, default=1, help="parallel worker count")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
