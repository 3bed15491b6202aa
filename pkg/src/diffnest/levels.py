"""Likelihood levels: creation, visit bookkeeping, prior-mass revision.

A level is a likelihood cutoff L*_j plus the estimated log prior mass
ln X_j enclosed above it. Level 0 is the unconstrained prior (cutoff -inf,
ln X = 0). New levels are cut at the 1 - 1/e quantile of the likelihoods
accumulated since the previous creation, so each level encloses about e^-1
times the mass of the one below; the exact masses are then continually
re-estimated from the observed fraction of visits to level j whose
likelihood also clears level j+1's cutoff.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .csvio import fmt_float, parse_float
from .model import LikelihoodValue

__all__ = ["Level", "LevelSet", "LikelihoodBuffer", "QUANTILE", "quantile_rank"]

#: Quantile at which a new cutoff is taken from the accumulated likelihoods.
QUANTILE = 1.0 - math.exp(-1.0)

_EXP_NEG1 = math.exp(-1.0)


@dataclass(frozen=True, slots=True)
class Level:
    """Read-only snapshot of one level's state.

    ``visits``/``exceeds`` are the pair counters for the compression
    estimate between this level and the next (accumulated only once the
    next level exists); ``occupancy`` counts every visit immediately and
    ``expected_occupancy`` integrates the target weights over the run, the
    two inputs of the exploration-enforcement factor.
    """

    index: int
    cutoff: LikelihoodValue
    log_x: float
    visits: int
    exceeds: int
    occupancy: int
    expected_occupancy: float


def quantile_rank(n: int, q: float = QUANTILE) -> int:
    """Nearest-rank index (0-based) of the q-quantile among n sorted values."""
    if n < 1:
        raise ValueError("quantile of an empty collection")
    rank = int(round(q * n))  # 1-based rank nearest to q*n
    return min(n, max(1, rank)) - 1


class LikelihoodBuffer:
    """Multiset of likelihoods seen since the last level creation.

    Values at or below the current top cutoff never belong here: the caller
    filters on insert and ``purge_up_to`` drops survivors below each newly
    created cutoff. Stored as (log_l, tiebreak) tuples so that sorting and
    comparisons run at C speed.
    """

    def __init__(self, capacity_target: int):
        if capacity_target < 1:
            raise ValueError("capacity target must be positive")
        self.capacity_target = int(capacity_target)
        self._values: list[tuple[float, float]] = []

    def __len__(self) -> int:
        return len(self._values)

    @property
    def full(self) -> bool:
        return len(self._values) >= self.capacity_target

    def record(self, log_l: float, tiebreak: float) -> None:
        self._values.append((log_l, tiebreak))

    def record_value(self, value: LikelihoodValue) -> None:
        self._values.append((value.log_l, value.tiebreak))

    def quantile_cutoff(self) -> tuple[float, float]:
        """The nearest-rank (1 - 1/e)-quantile of the buffered values."""
        ordered = sorted(self._values)
        return ordered[quantile_rank(len(ordered))]

    def purge_up_to(self, cutoff: tuple[float, float]) -> None:
        """Drop every buffered value <= cutoff (they can never exceed the
        new top level, so they are useless for the next creation)."""
        self._values = [v for v in self._values if v > cutoff]

    def clear(self) -> None:
        self._values.clear()

    def values(self) -> list[LikelihoodValue]:
        return [LikelihoodValue(l, t) for l, t in self._values]


class LevelSet:
    """Ordered set of levels.

    Cutoffs are strictly increasing under the (log_l, tiebreak) order and
    log_x strictly decreasing. Scalar per-level state lives in plain Python
    lists (they are touched a few at a time, millions of times per run);
    ``log_x`` and ``expected_occupancy`` are capacity-backed numpy arrays
    because they take whole-vector updates in the step loop. Engines read
    these fields directly.
    """

    def __init__(self, capacity: int = 128):
        capacity = max(2, int(capacity))
        self.cutoff_log_l: list[float] = [-math.inf]
        self.cutoff_tiebreak: list[float] = [0.0]
        self.visits: list[int] = [0]
        self.exceeds: list[int] = [0]
        self.occupancy: list[int] = [0]
        self.log_x = np.zeros(capacity)
        self.expected_occupancy = np.zeros(capacity)
        self.size = 1

    def __len__(self) -> int:
        return self.size

    @property
    def top(self) -> int:
        """Index of the current top level J."""
        return self.size - 1

    def __getitem__(self, j: int) -> Level:
        if not 0 <= j < self.size:
            raise IndexError(f"level index {j} out of range [0, {self.size})")
        return Level(
            index=j,
            cutoff=LikelihoodValue(self.cutoff_log_l[j], self.cutoff_tiebreak[j]),
            log_x=float(self.log_x[j]),
            visits=self.visits[j],
            exceeds=self.exceeds[j],
            occupancy=self.occupancy[j],
            expected_occupancy=float(self.expected_occupancy[j]),
        )

    def __iter__(self):
        return (self[j] for j in range(self.size))

    def exceeds_cutoff(self, log_l: float, tiebreak: float, j: int) -> bool:
        """Strict comparison of a likelihood against level j's cutoff."""
        c = self.cutoff_log_l[j]
        return log_l > c or (log_l == c and tiebreak > self.cutoff_tiebreak[j])

    # -- creation ---------------------------------------------------------

    def create_level(self, buffer: LikelihoodBuffer) -> Level | None:
        """Cut a new top level from the buffered likelihoods.

        Returns the new level, or None (no-op) when the buffer has not yet
        reached its capacity target. The new cutoff is the nearest-rank
        (1 - 1/e)-quantile of the buffer; its initial log_x sits exactly one
        e-fold below the previous top; buffered values at or below the new
        cutoff are purged.
        """
        if not buffer.full:
            return None
        cutoff = buffer.quantile_cutoff()
        j = self.size
        if j == len(self.log_x):
            for name in ("log_x", "expected_occupancy"):
                old = getattr(self, name)
                grown = np.zeros(2 * len(old))
                grown[:j] = old
                setattr(self, name, grown)
        self.cutoff_log_l.append(cutoff[0])
        self.cutoff_tiebreak.append(cutoff[1])
        self.visits.append(0)
        self.exceeds.append(0)
        self.occupancy.append(0)
        self.log_x[j] = self.log_x[j - 1] - 1.0
        self.expected_occupancy[j] = 0.0
        self.size = j + 1
        buffer.purge_up_to(cutoff)
        return self[j]

    # -- bookkeeping ------------------------------------------------------

    def record_visit(
        self, j: int, log_l: float, tiebreak: float, weights: np.ndarray
    ) -> None:
        """Account one step spent at level j with the given likelihood.

        Occupancy is accumulated immediately; the pair counters (visits,
        exceeds) only once level j+1 exists, since they estimate the
        compression onto that next level. Every level's expected occupancy
        advances by its current target weight.
        """
        self.occupancy[j] += 1
        if j + 1 < self.size:
            self.visits[j] += 1
            c = self.cutoff_log_l[j + 1]
            if log_l > c or (log_l == c and tiebreak > self.cutoff_tiebreak[j + 1]):
                self.exceeds[j] += 1
        self.expected_occupancy[: self.size] += weights

    def reset_occupancy_counters(self) -> None:
        """Zero the enforcement counters; compression counters are kept, so
        the log_x estimates are untouched."""
        self.occupancy = [0] * self.size
        self.expected_occupancy[: self.size] = 0.0

    # -- prior-mass revision ----------------------------------------------

    def compression_ratio(self, j: int, c: float) -> float:
        """Regularised estimate of X_{j+1}/X_j from the pair counters.

        With no data this is exactly e^-1; as visits grow the empirical
        exceedance fraction takes over.
        """
        return (self.exceeds[j] + c * _EXP_NEG1) / (self.visits[j] + c)

    def revise_log_x(self, c: float) -> None:
        """Recompute every log_x cumulatively from the pair counters."""
        if c <= 0:
            raise ValueError("regularisation count must be positive")
        n = self.size
        if n < 2:
            return
        exceeds = np.array(self.exceeds[: n - 1], dtype=float)
        visits = np.array(self.visits[: n - 1], dtype=float)
        self.log_x[1:n] = np.cumsum(np.log((exceeds + c * _EXP_NEG1) / (visits + c)))

    def revise_log_x_pair(self, j: int, c: float) -> None:
        """Refresh log_x after a counter update that touched only pair j.

        Matches ``revise_log_x`` (only the j -> j+1 ratio changed, so every
        higher level shifts by the same amount) but costs one scalar log
        and one vector add, which matters in the per-step hot loop.
        """
        if j + 1 >= self.size:
            return
        ratio = (self.exceeds[j] + c * _EXP_NEG1) / (self.visits[j] + c)
        new = self.log_x[j] + math.log(ratio)
        delta = new - self.log_x[j + 1]
        if delta != 0.0:
            self.log_x[j + 1 : self.size] += delta

    # -- serialization ----------------------------------------------------

    CSV_HEADER = [
        "index",
        "log_x",
        "cutoff_log_l",
        "cutoff_tiebreak",
        "visits",
        "exceeds",
        "occupancy",
        "expected_occupancy",
    ]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_HEADER)
            for j in range(self.size):
                writer.writerow(
                    [
                        j,
                        fmt_float(self.log_x[j]),
                        fmt_float(self.cutoff_log_l[j]),
                        fmt_float(self.cutoff_tiebreak[j]),
                        self.visits[j],
                        self.exceeds[j],
                        self.occupancy[j],
                        fmt_float(self.expected_occupancy[j]),
                    ]
                )

    @classmethod
    def read_csv(cls, path) -> "LevelSet":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != cls.CSV_HEADER:
                raise ValueError(f"unexpected levels header {header!r} in {path}")
            rows = list(reader)
        if not rows:
            raise ValueError(f"no levels in {path}")
        levels = cls(capacity=len(rows))
        levels.size = len(rows)
        levels.cutoff_log_l = [parse_float(r[2]) for r in rows]
        levels.cutoff_tiebreak = [parse_float(r[3]) for r in rows]
        levels.visits = [int(r[4]) for r in rows]
        levels.exceeds = [int(r[5]) for r in rows]
        levels.occupancy = [int(r[6]) for r in rows]
        for idx, row in enumerate(rows):
            if int(row[0]) != idx:
                raise ValueError(f"non-contiguous level indices in {path}")
            levels.log_x[idx] = parse_float(row[1])
            levels.expected_occupancy[idx] = parse_float(row[7])
        return levels
