"""Classic MCMC-based nested sampling baseline.

N particles start on the prior; at every iteration the worst one is
recorded as a dead point, assigned the deterministic prior-mass estimate
ln X_k = -k/N, and replaced by a copy of a random survivor evolved by
constrained random-walk Metropolis (prior moves, rejecting anything at or
below the current likelihood floor). Evidence comes from trapezoid
integration over the dead points plus the usual live-particle remainder.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .csvio import fmt_float
from .model import Model
from .rngbuf import BlockRNG

__all__ = ["ClassicConfig", "ClassicResult", "run_classic", "write_dead_points_csv"]


@dataclass
class ClassicConfig:
    """Baseline run parameters.

    ``iteration_count`` defaults to 100 * particle_count, which drives the
    compression down to ln X = -100; with that choice the whole run costs
    exactly particle_count + iteration_count * mcmc_steps likelihood
    evaluations.
    """

    particle_count: int = 1
    mcmc_steps: int = 100_000
    iteration_count: int | None = None
    seed: int = 0
    stochastic_x: bool = False  # Beta-sampled shrinkage instead of e^{-k/N}

    def resolved_iterations(self) -> int:
        if self.iteration_count is not None:
            return self.iteration_count
        return 100 * self.particle_count

    def validate(self) -> None:
        if self.particle_count < 1:
            raise ValueError("particle_count must be positive")
        if self.mcmc_steps < 1:
            raise ValueError("mcmc_steps must be positive")
        if self.resolved_iterations() < 1:
            raise ValueError("iteration_count must be positive")


@dataclass
class ClassicResult:
    dead_log_x: np.ndarray
    dead_log_l: np.ndarray
    log_z: float
    information: float
    ess: float
    likelihood_evals: int
    model_calls: int
    posterior_weights: np.ndarray = field(repr=False, default=None)


def _mcmc_evolve(
    model: Model,
    theta: np.ndarray,
    log_l: float,
    tiebreak: float,
    floor: tuple[float, float],
    steps: int,
    rng: np.random.Generator,
    counter: list[int],
) -> tuple[np.ndarray, float, float]:
    """Random-walk Metropolis targeting the prior above a likelihood floor.

    Every step charges one likelihood evaluation; proposals that leave the
    prior support are charged but not evaluated against the model.
    """
    for _ in range(steps):
        proposal, log_corr = model.perturb(theta, rng)
        if log_corr == -math.inf:
            continue
        if log_corr < 0.0 and rng.random() >= math.exp(log_corr):
            continue
        counter[0] += 1
        new_log_l = model.log_l(proposal)
        if not math.isfinite(new_log_l):
            raise ValueError(
                f"model returned non-finite log-likelihood {new_log_l!r}; aborting run"
            )
        new_tiebreak = rng.random()
        if (new_log_l, new_tiebreak) > floor:
            theta = proposal
            log_l = new_log_l
            tiebreak = new_tiebreak
    return theta, log_l, tiebreak


def run_classic(
    model: Model,
    config: ClassicConfig,
    rng: np.random.Generator | None = None,
    evolve: Callable | None = None,
) -> ClassicResult:
    """Execute one classic nested sampling run.

    ``evolve`` may replace the constrained-MCMC replacement step (same
    signature as the internal one minus the step count); it exists so that
    perfect independent sampling can be substituted when a problem allows
    it, to validate the sqrt(H/N) error theory.
    """
    config.validate()
    rng = BlockRNG(config.seed if rng is None else rng)
    n = config.particle_count
    iterations = config.resolved_iterations()

    thetas = [model.from_prior(rng) for _ in range(n)]
    log_ls = [float(model.log_l(t)) for t in thetas]
    tiebreaks = [float(rng.random()) for _ in range(n)]
    model_calls = n
    likelihood_evals = n

    dead_log_x = np.empty(iterations)
    dead_log_l = np.empty(iterations)
    log_x_current = 0.0
    for k in range(1, iterations + 1):
        worst = min(range(n), key=lambda i: (log_ls[i], tiebreaks[i]))
        if config.stochastic_x:
            log_x_current += math.log(rng.beta(n, 1))
        else:
            log_x_current = -k / n
        dead_log_x[k - 1] = log_x_current
        dead_log_l[k - 1] = log_ls[worst]
        floor = (log_ls[worst], tiebreaks[worst])

        if n > 1:
            source = int(rng.integers(n - 1))
            if source >= worst:
                source += 1
        else:
            source = worst
        theta = thetas[source].copy()
        log_l = log_ls[source]
        tiebreak = tiebreaks[source]
        if evolve is not None:
            theta, log_l, tiebreak = evolve(model, theta, log_l, tiebreak, floor, rng)
            likelihood_evals += config.mcmc_steps
        else:
            counter = [0]
            theta, log_l, tiebreak = _mcmc_evolve(
                model, theta, log_l, tiebreak, floor, config.mcmc_steps, rng, counter
            )
            likelihood_evals += config.mcmc_steps
            model_calls += counter[0]
        thetas[worst] = theta
        log_ls[worst] = log_l
        tiebreaks[worst] = tiebreak

    # Trapezoid widths over dead points, then the remainder: each live
    # particle is folded in with an equal share of the final enclosed mass.
    x = np.exp(dead_log_x)
    left = np.concatenate(([1.0], x[:-1]))
    right = np.concatenate((x[1:], [x[-1]]))
    widths = 0.5 * (left - right)
    x_final = x[-1]
    all_log_l = np.concatenate((dead_log_l, np.sort(np.array(log_ls))))
    with np.errstate(divide="ignore"):
        all_log_w = np.concatenate(
            (np.log(widths), np.full(n, math.log(x_final) - math.log(n)))
        )
    log_z = float(logsumexp(all_log_l + all_log_w))
    weights = np.exp(all_log_l + all_log_w - log_z)
    information = float(np.dot(weights, all_log_l - log_z))
    ess = float(1.0 / np.sum(np.square(weights)))

    return ClassicResult(
        dead_log_x=dead_log_x,
        dead_log_l=dead_log_l,
        log_z=log_z,
        information=information,
        ess=ess,
        likelihood_evals=likelihood_evals,
        model_calls=model_calls,
        posterior_weights=weights,
    )


def write_dead_points_csv(result: ClassicResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["log_x", "log_l"])
        for lx, ll in zip(result.dead_log_x, result.dead_log_l):
            writer.writerow([fmt_float(lx), fmt_float(ll)])
