"""Accuracy comparison harness: diffusive vs classic under a fixed budget.

Each method is run several times with derived seeds; the headline number is
the RMS error of the per-run posterior-mean log evidence against the known
truth. Classic methods also get the theoretical sqrt(H/N) column computed
from their measured information. Replicas are embarrassingly parallel;
aggregation is deterministic regardless of scheduling.
"""

from __future__ import annotations

import csv
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classic import ClassicConfig, run_classic
from .csvio import fmt_float
from .explorer import DiffusiveSampler, RunConfig
from .postprocess import evidence_error_bar
from .problems import make_problem

__all__ = [
    "MethodSpec",
    "BenchPlan",
    "MethodResult",
    "rms_error",
    "classic_steps_for_budget",
    "default_plan",
    "run_bench",
    "write_bench_csv",
    "write_bench_markdown",
]

#: Classic runs are stopped once the deterministic compression reaches
#: ln X = -100, i.e. after 100 * N iterations.
CLASSIC_DEPTH = 100


def classic_steps_for_budget(budget: int, particle_count: int) -> int:
    """MCMC steps per iteration so that 100*N iterations exhaust the budget."""
    steps = budget // (CLASSIC_DEPTH * particle_count)
    if steps < 1:
        raise ValueError(
            f"budget {budget} cannot reach depth {CLASSIC_DEPTH} "
            f"with {particle_count} particles"
        )
    return steps


def rms_error(estimates, truth: float) -> float:
    """Root mean square deviation of the estimates from the truth."""
    arr = np.asarray(list(estimates), dtype=float)
    if arr.size == 0:
        raise ValueError("rms_error of an empty estimate list")
    return float(np.sqrt(np.mean(np.square(arr - truth))))


@dataclass(frozen=True)
class MethodSpec:
    """One row of the comparison: either the diffusive engine with config
    overrides, or a classic configuration (N, steps per iteration)."""

    kind: str  # "diffusive" | "classic"
    label: str
    particle_count: int = 1
    mcmc_steps: int = 0  # classic only
    level_interval: int = 10_000  # diffusive only
    save_interval: int = 10_000  # diffusive only

    def params_text(self) -> str:
        if self.kind == "classic":
            return f"{self.particle_count} particles, {self.mcmc_steps} MCMC steps per NS step"
        return (
            f"{self.particle_count} particle(s), level interval {self.level_interval}, "
            f"save interval {self.save_interval}"
        )

    def seed_key(self) -> int:
        # Stable across processes and runs; identical methods share streams.
        return zlib.crc32(f"{self.kind}|{self.params_text()}".encode())


@dataclass
class BenchPlan:
    methods: list[MethodSpec]
    runs: int = 8
    budget: int = 1_000_000
    problem: str = "twin_gaussian"
    truth: float = math.log(101.0)
    seed: int = 1
    max_levels: int = 100
    c: float = 1_000.0
    lam: float = 10.0
    beta: float = 10.0
    error_bar_reps: int = 50

    def validate(self) -> None:
        if self.runs < 2:
            raise ValueError("a benchmark needs at least 2 runs per method")
        if self.budget < 100_000:
            raise ValueError("budgets below 1e5 do not produce meaningful levels")


@dataclass
class MethodResult:
    spec: MethodSpec
    estimates: list[float]
    informations: list[float]
    failures: int
    rms: float | None
    theory: float | None  # sqrt(mean H / N), classic only
    quartiles: tuple[float, float, float, float, float] | None
    flagged: bool  # more than 20% of runs failed

    def row(self) -> list:
        q = self.quartiles or (math.nan,) * 5
        return [
            self.spec.label,
            self.spec.params_text(),
            len(self.estimates),
            self.failures,
            "FAILED" if self.flagged else "ok",
            fmt_float(self.rms) if self.rms is not None else "",
            fmt_float(self.theory) if self.theory is not None else "",
            *[fmt_float(v) for v in q],
        ]


def default_plan(
    budget: int = 1_000_000,
    runs: int = 8,
    scale: float = 0.1,
    seed: int = 1,
    full: bool = False,
    problem: str = "twin_gaussian",
    truth: float | None = None,
) -> BenchPlan:
    """The standard five-method comparison plan.

    Desk scale uses 8 runs of 1e6 evaluations with the level/save intervals
    shrunk by `scale` so that level creation still finishes early in each
    run; `full` restores the reference setup (24 runs of 1e7, unscaled).
    """
    if full:
        budget, runs, scale = 10_000_000, 24, 1.0
    interval = max(100, int(round(10_000 * scale)))
    methods = [
        MethodSpec(
            kind="diffusive",
            label="diffusive",
            level_interval=interval,
            save_interval=interval,
        )
    ]
    for n in (1, 10, 100, 300):
        methods.append(
            MethodSpec(
                kind="classic",
                label=f"classic N={n}",
                particle_count=n,
                mcmc_steps=classic_steps_for_budget(budget, n),
            )
        )
    if truth is None:
        truth = math.log(101.0) if problem == "twin_gaussian" else (
            make_problem(problem).true_log_evidence()
        )
    return BenchPlan(
        methods=methods, runs=runs, budget=budget, problem=problem,
        truth=truth, seed=seed,
    )


def _run_replica(args) -> tuple[int, int, float, float, str]:
    """One (method, replica) cell; returns (mi, ri, log_z, H, status)."""
    plan, mi, ri = args
    spec = plan.methods[mi]
    entropy = [plan.seed, spec.seed_key(), ri]
    model = make_problem(plan.problem)
    try:
        if spec.kind == "classic":
            config = ClassicConfig(
                particle_count=spec.particle_count,
                mcmc_steps=spec.mcmc_steps,
                iteration_count=CLASSIC_DEPTH * spec.particle_count,
            )
            result = run_classic(model, config, rng=np.random.default_rng(entropy))
            return mi, ri, result.log_z, result.information, "ok"
        config = RunConfig(
            particle_count=spec.particle_count,
            new_level_interval=spec.level_interval,
            save_interval=spec.save_interval,
            max_levels=plan.max_levels,
            c=plan.c,
            lam=plan.lam,
            beta=plan.beta,
            likelihood_budget=plan.budget,
            seed=entropy + [0],
        )
        run = DiffusiveSampler(model, config).run()
        mean_log_z, _ = evidence_error_bar(
            run.samples,
            run.levels,
            repetitions=plan.error_bar_reps,
            rng=np.random.default_rng(entropy + [1]),
        )
        return mi, ri, mean_log_z, math.nan, "ok"
    except Exception as exc:  # failed replica: recorded, excluded, flagged
        return mi, ri, math.nan, math.nan, f"error: {exc}"


def run_bench(plan: BenchPlan, jobs: int = 1) -> list[MethodResult]:
    """Execute the plan and aggregate per-method statistics.

    Replica cells are independent; with jobs > 1 they are fanned out over
    processes. Results are reduced in (method, replica) order, so parallel
    and serial execution produce identical tables.
    """
    plan.validate()
    tasks = [(plan, mi, ri) for mi in range(len(plan.methods)) for ri in range(plan.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_replica, tasks, chunksize=1))
    else:
        cells = [_run_replica(t) for t in tasks]
    cells.sort(key=lambda c: (c[0], c[1]))

    results: list[MethodResult] = []
    for mi, spec in enumerate(plan.methods):
        rows = [c for c in cells if c[0] == mi]
        estimates = [c[2] for c in rows if c[4] == "ok"]
        infos = [c[3] for c in rows if c[4] == "ok" and not math.isnan(c[3])]
        failures = sum(1 for c in rows if c[4] != "ok")
        flagged = failures > 0.2 * plan.runs
        rms = rms_error(estimates, plan.truth) if estimates else None
        theory = None
        if spec.kind == "classic" and infos:
            theory = math.sqrt(float(np.mean(infos)) / spec.particle_count)
        quartiles = None
        if estimates:
            q = np.percentile(estimates, [0, 25, 50, 75, 100])
            quartiles = tuple(float(v) for v in q)
        results.append(
            MethodResult(
                spec=spec,
                estimates=estimates,
                informations=infos,
                failures=failures,
                rms=rms,
                theory=theory,
                quartiles=quartiles,
                flagged=flagged,
            )
        )
    return results


_TABLE_HEADER = [
    "method",
    "params",
    "runs",
    "failures",
    "status",
    "rms_log_z",
    "theory_sqrt_h_over_n",
    "min",
    "q1",
    "median",
    "q3",
    "max",
]


def write_bench_csv(results: list[MethodResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TABLE_HEADER)
        for r in results:
            writer.writerow(r.row())


def write_bench_markdown(results: list[MethodResult], path, truth: float) -> None:
    with open(path, "w") as fh:
        fh.write(f"True log evidence: {truth:.4f}\n\n")
        fh.write("| " + " | ".join(_TABLE_HEADER) + " |\n")
        fh.write("|" + "---|" * len(_TABLE_HEADER) + "\n")
        for r in results:
            fh.write("| " + " | ".join(str(v) for v in r.row()) + " |\n")
