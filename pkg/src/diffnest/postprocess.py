"""Turn saved samples plus the final level set into posterior quantities.

Each thinned sample is bracketed by the two levels its likelihood falls
between, which pins its unknown prior-mass coordinate X to an interval;
drawing X uniformly inside that interval (the conditional distribution is
uniform) converts the sample set into an integrable likelihood-vs-mass
curve. Evidence, posterior weights, information and randomized error bars
all follow from that assignment.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .csvio import fmt_float, parse_float
from .levels import LevelSet
from .model import LikelihoodValue

__all__ = [
    "SampleRecord",
    "XAssignment",
    "assign_x",
    "log_evidence",
    "posterior_weights",
    "effective_sample_size",
    "information",
    "evidence_error_bar",
    "resample_posterior",
    "write_samples_csv",
    "read_samples_csv",
    "write_results",
    "read_results",
]


@dataclass(frozen=True, slots=True)
class SampleRecord:
    """One thinned saved sample with its likelihood and save-time level."""

    theta: np.ndarray
    log_l: float
    tiebreak: float
    level_index: int
    particle_id: int = 0

    @property
    def likelihood(self) -> LikelihoodValue:
        return LikelihoodValue(self.log_l, self.tiebreak)


@dataclass(slots=True)
class XAssignment:
    """Per-sample prior-mass draws, their sandwich intervals and weights."""

    x: np.ndarray
    lower: np.ndarray  # interval lower bounds (X of the level above, 0 at top)
    upper: np.ndarray  # interval upper bounds (X of the bracketing level)
    weights: np.ndarray = field(default=None)  # normalized posterior weights


def sandwich_intervals(
    samples: list[SampleRecord], levels: LevelSet
) -> tuple[np.ndarray, np.ndarray]:
    """(lower, upper) X-interval bounds bracketing each sample.

    A sample is bracketed by the highest level whose cutoff its likelihood
    exceeds (levels are located by likelihood alone; the saved level index
    plays no role here) and the next level up; above the top level the
    interval extends down to X = 0.
    """
    n = levels.size
    cutoffs = [
        (float(levels.cutoff_log_l[j]), float(levels.cutoff_tiebreak[j]))
        for j in range(n)
    ]
    xs = np.exp(levels.log_x[:n])
    lower = np.empty(len(samples))
    upper = np.empty(len(samples))
    for idx, s in enumerate(samples):
        # number of cutoffs strictly below the sample's likelihood, minus 1
        i = bisect_right(cutoffs, (s.log_l, s.tiebreak)) - 1
        if i < 0:
            raise ValueError(
                "sample likelihood below the level-0 cutoff; corrupt inputs"
            )
        upper[idx] = xs[i]
        lower[idx] = xs[i + 1] if i + 1 < n else 0.0
    return lower, upper


def assign_x(
    samples: list[SampleRecord], levels: LevelSet, rng: np.random.Generator
) -> XAssignment:
    """Draw one X per sample, uniform inside its sandwich interval."""
    if not samples:
        raise ValueError("no samples to assign")
    lower, upper = sandwich_intervals(samples, levels)
    x = lower + (upper - lower) * rng.random(len(samples))
    assignment = XAssignment(x=x, lower=lower, upper=upper)
    assignment.weights = posterior_weights(assignment, samples)
    return assignment


def _log_widths(x: np.ndarray) -> np.ndarray:
    """Log trapezoid widths, aligned with the input order.

    Samples are sorted by X descending; sample i gets width
    (x_{i-1} - x_{i+1}) / 2 with the conventions x_{-1} = 1 and x_N = 0, so
    the widths tile (0, 1] with second-order accuracy.
    """
    order = np.argsort(-x, kind="stable")
    xs = x[order]
    left = np.concatenate(([1.0], xs[:-1]))
    right = np.concatenate((xs[1:], [0.0]))
    widths = 0.5 * (left - right)
    with np.errstate(divide="ignore"):
        log_w_sorted = np.log(widths)
    log_w = np.empty_like(log_w_sorted)
    log_w[order] = log_w_sorted
    return log_w


def log_evidence(assignment: XAssignment, samples: list[SampleRecord]) -> float:
    """ln Z by trapezoid integration of likelihood over prior mass."""
    if len(samples) < 2:
        raise ValueError("evidence integration needs at least 2 samples")
    log_l = np.array([s.log_l for s in samples])
    return float(logsumexp(log_l + _log_widths(assignment.x)))


def posterior_weights(
    assignment: XAssignment, samples: list[SampleRecord]
) -> np.ndarray:
    """Normalized posterior weights, width x likelihood per sample."""
    log_l = np.array([s.log_l for s in samples])
    log_w = log_l + _log_widths(assignment.x)
    log_w -= logsumexp(log_w)
    return np.exp(log_w)


def effective_sample_size(weights: np.ndarray) -> float:
    """ESS = 1 / sum(w^2) for normalized weights."""
    return float(1.0 / np.sum(np.square(weights)))


def information(
    weights: np.ndarray, samples: list[SampleRecord], log_z: float
) -> float:
    """Information H = sum_i w_i (ln L_i - ln Z), the prior-to-posterior
    divergence; sets the theoretical sqrt(H/N) error of classic runs."""
    log_l = np.array([s.log_l for s in samples])
    return float(np.dot(weights, log_l - log_z))


def evidence_error_bar(
    samples: list[SampleRecord],
    levels: LevelSet,
    repetitions: int = 100,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Mean and standard deviation of ln Z over repeated X assignments.

    Captures only the within-interval placement uncertainty, not the error
    of the level X estimates themselves, so it understates the true
    run-to-run spread.
    """
    if repetitions < 2:
        raise ValueError("need at least 2 repetitions for an error bar")
    if rng is None:
        rng = np.random.default_rng()
    lower, upper = sandwich_intervals(samples, levels)
    log_l = np.array([s.log_l for s in samples])
    estimates = np.empty(repetitions)
    for m in range(repetitions):
        x = lower + (upper - lower) * rng.random(len(samples))
        estimates[m] = logsumexp(log_l + _log_widths(x))
    return float(np.mean(estimates)), float(np.std(estimates, ddof=1))


def resample_posterior(
    samples: list[SampleRecord],
    weights: np.ndarray,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Multinomial draw of `count` sample indices proportional to weights."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    return rng.choice(len(samples), size=count, replace=True, p=weights)


# -- run files --------------------------------------------------------------

SAMPLE_INFO_HEADER = ["particle_id", "level_index_j", "log_l", "tiebreak"]


def write_samples_csv(samples: list[SampleRecord], sample_path, info_path) -> None:
    ndim = len(samples[0].theta) if samples else 0
    with open(sample_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(ndim)])
        for s in samples:
            writer.writerow([fmt_float(v) for v in s.theta])
    with open(info_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SAMPLE_INFO_HEADER)
        for s in samples:
            writer.writerow(
                [s.particle_id, s.level_index, fmt_float(s.log_l), fmt_float(s.tiebreak)]
            )


def read_samples_csv(sample_path, info_path) -> list[SampleRecord]:
    with open(sample_path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # coordinate header
        thetas = [np.array([parse_float(v) for v in row]) for row in reader]
    samples: list[SampleRecord] = []
    with open(info_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SAMPLE_INFO_HEADER:
            raise ValueError(f"unexpected sample_info header {header!r}")
        for theta, row in zip(thetas, reader, strict=True):
            samples.append(
                SampleRecord(
                    theta=theta,
                    log_l=parse_float(row[2]),
                    tiebreak=parse_float(row[3]),
                    level_index=int(row[1]),
                    particle_id=int(row[0]),
                )
            )
    return samples


def write_results(path, log_z: float, log_z_std: float, h: float, ess: float) -> None:
    with open(path, "w") as fh:
        fh.write(f"log_evidence = {fmt_float(log_z)}\n")
        fh.write(f"log_evidence_std = {fmt_float(log_z_std)}\n")
        fh.write(f"information = {fmt_float(h)}\n")
        fh.write(f"ess = {fmt_float(ess)}\n")


def read_results(path) -> dict[str, float]:
    out: dict[str, float] = {}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.partition("=")
            out[key.strip()] = parse_float(value.strip())
    return out
