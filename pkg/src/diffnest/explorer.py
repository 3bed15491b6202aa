"""Diffusive exploration engine.

One or more particles carry a parameter vector theta and a level label j,
and evolve by Metropolis moves over the joint target

    p(theta, j)  propto  (w_j / X_j) * prior(theta) * [L(theta) > L*_j],

a weighted mixture of the nested constrained priors. While levels are
still being created the weights decay exponentially away from the top
level, letting the particle backtrack to freer distributions; once the
maximum number of levels exists, exploration switches to uniform weights
and runs for as long as the likelihood budget allows, refining the level
mass estimates and emitting thinned posterior samples throughout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .csvio import fmt_float
from .levels import LevelSet, LikelihoodBuffer
from .model import LikelihoodValue, Model
from .postprocess import SampleRecord, SAMPLE_INFO_HEADER
from .rngbuf import BlockRNG

__all__ = [
    "RunConfig",
    "ParticleState",
    "RunResult",
    "DiffusiveSampler",
    "level_weights",
    "enforce_factor",
    "log_enforce_factor",
]

_LN_100 = math.log(100.0)


@dataclass
class RunConfig:
    """All run knobs. Defaults are the benchmark settings: one particle,
    10,000 likelihoods per new level, saves every 10,000 steps, at most 100
    levels, regularisation 1,000, backtracking scale 10, enforcement 10."""

    particle_count: int = 1
    new_level_interval: int = 10_000
    save_interval: int = 10_000
    max_levels: int = 100
    c: float = 1_000.0
    lam: float = 10.0
    beta: float = 10.0
    likelihood_budget: int = 10_000_000
    seed: int = 0
    # Stuck-particle pruning: delete a particle that has sat more than
    # prune_lag_factor * lam levels below the top for prune_window
    # consecutive save checkpoints (multi-particle runs only).
    prune_lag_factor: float = 5.0
    prune_window: int = 10

    def validate(self) -> None:
        for name in (
            "particle_count",
            "new_level_interval",
            "save_interval",
            "max_levels",
            "likelihood_budget",
            "prune_window",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive count")
        if self.c <= 0:
            raise ValueError("regularisation constant c must be > 0")
        if self.lam <= 0:
            raise ValueError("backtracking scale lam must be > 0")
        if self.beta < 0:
            raise ValueError("enforcement strength beta must be >= 0")
        if self.prune_lag_factor <= 0:
            raise ValueError("prune_lag_factor must be > 0")


@dataclass
class ParticleState:
    """One walker: position, level label and cached likelihood."""

    theta: np.ndarray
    j: int
    log_l: float
    tiebreak: float
    particle_id: int = 0
    lag_strikes: int = 0  # consecutive checkpoints spent far below the top

    @property
    def likelihood(self) -> LikelihoodValue:
        return LikelihoodValue(self.log_l, self.tiebreak)


@dataclass
class RunResult:
    samples: list[SampleRecord]
    levels: LevelSet
    steps: int
    likelihood_evals: int
    model_calls: int
    particles: list[ParticleState] = field(default_factory=list)


def level_weights(top: int, lam: float, max_reached: bool = False) -> np.ndarray:
    """Mixture weights over levels 0..top.

    Exponentially decaying toward lower levels, w_j propto exp((j - top)/lam),
    while levels are still being created; uniform once the maximum number of
    levels has been reached.
    """
    if top < 0:
        raise ValueError("top level index must be >= 0")
    n = top + 1
    if max_reached:
        return np.full(n, 1.0 / n)
    w = np.exp((np.arange(n) - top) / lam)
    return w / w.sum()


def log_enforce_factor(
    occupancy_j: float,
    expected_j: float,
    occupancy_k: float,
    expected_k: float,
    c: float,
    beta: float,
) -> float:
    """Log of the acceptance bias favouring under-visited levels.

    Each level's actual visit count is compared with the weight mass it
    should have received; a move from j to k is boosted when k lags its
    target more than j does. The factor is exactly self-inverse under
    swapping j and k.
    """
    log_j = math.log(occupancy_j + c) - math.log(expected_j + c)
    log_k = math.log(occupancy_k + c) - math.log(expected_k + c)
    return beta * (log_j - log_k)


def enforce_factor(
    occupancy_j: float,
    expected_j: float,
    occupancy_k: float,
    expected_k: float,
    c: float,
    beta: float,
) -> float:
    return math.exp(
        log_enforce_factor(occupancy_j, expected_j, occupancy_k, expected_k, c, beta)
    )


class DiffusiveSampler:
    """Runs the joint (theta, j) chain against a model.

    Parameters
    ----------
    model : Model
        The problem to sample. Shared, never mutated.
    config : RunConfig
        Run parameters; the seed fully determines the run.
    levels : LevelSet, optional
        Pre-built levels to start from (diagnostics and calibration).
    freeze_levels : bool
        Diagnostic mode: no level creation, no mass revision, no buffer
        recording. The chain then explores a fixed, known ladder.
    check_invariants : bool
        Assert after every step that each particle's likelihood exceeds its
        level's cutoff.
    output_dir : path-like, optional
        If set, sample.csv and sample_info.csv are appended to during the
        run (written from scratch at run start).
    """

    def __init__(
        self,
        model: Model,
        config: RunConfig,
        levels: LevelSet | None = None,
        freeze_levels: bool = False,
        check_invariants: bool = False,
        output_dir=None,
    ):
        config.validate()
        self.model = model
        self.config = config
        self.rng = BlockRNG(config.seed)
        self.levels = levels if levels is not None else LevelSet(config.max_levels + 1)
        self.buffer = LikelihoodBuffer(config.new_level_interval)
        self.freeze_levels = freeze_levels
        self.check_invariants = check_invariants
        self.output_dir = output_dir
        self.max_reached = self.levels.top >= config.max_levels
        self._recording_done = self.max_reached or freeze_levels
        self.counters_reset = False
        self.steps = 0
        self.likelihood_evals = 0  # budget charged, one per theta proposal
        self.model_calls = 0  # actual model.log_likelihood invocations
        self.samples: list[SampleRecord] = []
        self._sample_writer = None
        self._info_writer = None
        self.particles: list[ParticleState] = []
        for pid in range(config.particle_count):
            theta = model.from_prior(self.rng)
            log_l, tiebreak = self._evaluate(theta)
            self.particles.append(
                ParticleState(theta, 0, log_l, tiebreak, particle_id=pid)
            )
        self._round_robin = 0
        self._refresh_weights()

    # -- plumbing ---------------------------------------------------------

    def _evaluate(self, theta: np.ndarray) -> tuple[float, float]:
        """(log_l, fresh tiebreak); aborts on a non-finite model value."""
        self.model_calls += 1
        log_l = self.model.log_l(theta)
        if not math.isfinite(log_l):
            raise ValueError(
                f"model returned non-finite log-likelihood {log_l!r}; aborting run"
            )
        return log_l, self.rng.random()

    def _refresh_weights(self) -> None:
        self.weights = level_weights(self.levels.top, self.config.lam, self.max_reached)
        self._log_weights = np.log(self.weights).tolist()

    # -- elementary moves --------------------------------------------------

    def update_theta(self, state: ParticleState) -> bool:
        """One Metropolis move of the particle's position.

        The proposal must both pass the prior-invariance correction and keep
        the likelihood above the particle's current level cutoff. Whatever
        likelihood the particle ends up with is recorded to the creation
        buffer when it clears the top cutoff. Returns True on acceptance.

        Every call charges one likelihood evaluation against the budget,
        whether or not the proposal was worth evaluating.
        """
        self.likelihood_evals += 1
        rng = self.rng
        levels = self.levels
        proposal, log_corr = self.model.perturb(state.theta, rng)
        accepted = False
        if log_corr != -math.inf:
            log_l, tiebreak = self._evaluate(proposal)
            if log_corr >= 0.0 or rng.random() < math.exp(log_corr):
                c = levels.cutoff_log_l[state.j]
                if log_l > c or (
                    log_l == c and tiebreak > levels.cutoff_tiebreak[state.j]
                ):
                    state.theta = proposal
                    state.log_l = log_l
                    state.tiebreak = tiebreak
                    accepted = True
        if not self._recording_done:
            top = levels.size - 1
            c = levels.cutoff_log_l[top]
            log_l = state.log_l
            if log_l > c or (
                log_l == c and state.tiebreak > levels.cutoff_tiebreak[top]
            ):
                self.buffer.record(log_l, state.tiebreak)
        return accepted

    def update_index(self, state: ParticleState) -> bool:
        """One Metropolis move of the particle's level label.

        The proposed label is the current one plus Gaussian noise whose
        scale is drawn log-uniform from [1, 100] per proposal, rounded;
        labels outside the existing ladder are rejected immediately, as are
        those whose cutoff the particle's likelihood does not clear. The
        acceptance ratio combines the mixture target with the
        visit-enforcement bias. Returns True when the label changed.
        """
        levels = self.levels
        top = levels.size - 1
        if top == 0:
            return False  # only the prior level exists; nothing to move to
        rng = self.rng
        sigma = math.exp(rng.uniform(0.0, _LN_100))
        k = round(state.j + sigma * rng.standard_normal())
        if k < 0 or k > top or k == state.j:
            return False
        c = levels.cutoff_log_l[k]
        log_l = state.log_l
        if log_l < c or (log_l == c and state.tiebreak <= levels.cutoff_tiebreak[k]):
            return False
        j = state.j
        log_w = self._log_weights
        log_x = levels.log_x
        log_ratio = (log_w[k] - log_x[k]) - (log_w[j] - log_x[j])
        beta = self.config.beta
        if beta != 0.0:
            reg = self.config.c
            occ = levels.occupancy
            exp_occ = levels.expected_occupancy
            log_ratio += beta * (
                math.log(occ[j] + reg)
                - math.log(exp_occ[j] + reg)
                - math.log(occ[k] + reg)
                + math.log(exp_occ[k] + reg)
            )
        if log_ratio >= 0.0 or rng.random() < math.exp(log_ratio):
            state.j = k
            return True
        return False

    # -- orchestration -----------------------------------------------------

    def step(self) -> None:
        """Advance the chain by one step.

        Picks the next particle round-robin, applies the position and label
        moves in random order, books the visit, refreshes the level-mass
        estimate for the visited pair, then handles level creation and the
        thinning/pruning checkpoints.
        """
        config = self.config
        state = self.particles[self._round_robin % len(self.particles)]
        self._round_robin += 1
        if self.rng.random() < 0.5:
            self.update_theta(state)
            self.update_index(state)
        else:
            self.update_index(state)
            self.update_theta(state)
        levels = self.levels
        levels.record_visit(state.j, state.log_l, state.tiebreak, self.weights)
        if not self.freeze_levels:
            levels.revise_log_x_pair(state.j, config.c)
            if not self.max_reached and self.buffer.full:
                levels.create_level(self.buffer)
                if levels.top >= config.max_levels:
                    self.max_reached = True
                    self._recording_done = True
                    self.buffer.clear()  # served level creation only
                    levels.reset_occupancy_counters()
                    self.counters_reset = True
                self._refresh_weights()
        self.steps += 1
        if self.steps % config.save_interval == 0:
            self._save_sample(state)
            if len(self.particles) > 1 and not self.max_reached:
                self._prune_checkpoint()
        if self.check_invariants:
            for p in self.particles:
                assert levels.exceeds_cutoff(p.log_l, p.tiebreak, p.j), (
                    f"particle {p.particle_id} violates its level constraint"
                )

    def _save_sample(self, state: ParticleState) -> None:
        record = SampleRecord(
            theta=state.theta.copy(),
            log_l=state.log_l,
            tiebreak=state.tiebreak,
            level_index=state.j,
            particle_id=state.particle_id,
        )
        self.samples.append(record)
        if self._sample_writer is not None:
            self._sample_writer.writerow(fmt_float(v) for v in record.theta)
            self._info_writer.writerow(
                [
                    record.particle_id,
                    record.level_index,
                    fmt_float(record.log_l),
                    fmt_float(record.tiebreak),
                ]
            )

    def _prune_checkpoint(self) -> None:
        """Delete particles stuck far below the top level.

        A particle is stuck when its label has stayed below
        top - prune_lag_factor * lam for prune_window consecutive save
        checkpoints; the last surviving particle is never deleted.
        """
        threshold = self.levels.top - self.config.prune_lag_factor * self.config.lam
        for p in self.particles:
            if p.j < threshold:
                p.lag_strikes += 1
            else:
                p.lag_strikes = 0
        survivors = [p for p in self.particles if p.lag_strikes < self.config.prune_window]
        if not survivors:
            survivors = [self.particles[0]]
        if len(survivors) != len(self.particles):
            self.particles = survivors

    def run(self) -> RunResult:
        """Run until the likelihood budget is exhausted."""
        budget = self.config.likelihood_budget
        if self.output_dir is not None:
            import os

            os.makedirs(self.output_dir, exist_ok=True)
            sample_path = os.path.join(self.output_dir, "sample.csv")
            info_path = os.path.join(self.output_dir, "sample_info.csv")
            with open(sample_path, "w", newline="") as sf, open(
                info_path, "w", newline=""
            ) as inf:
                self._sample_writer = csv.writer(sf)
                self._info_writer = csv.writer(inf)
                self._sample_writer.writerow(
                    [f"x{i}" for i in range(self.model.ndim)]
                )
                self._info_writer.writerow(SAMPLE_INFO_HEADER)
                try:
                    while self.likelihood_evals < budget:
                        self.step()
                finally:
                    self._sample_writer = None
                    self._info_writer = None
        else:
            while self.likelihood_evals < budget:
                self.step()
        return RunResult(
            samples=self.samples,
            levels=self.levels,
            steps=self.steps,
            likelihood_evals=self.likelihood_evals,
            model_calls=self.model_calls,
            particles=self.particles,
        )
