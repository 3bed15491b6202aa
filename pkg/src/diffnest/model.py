"""Problem contract shared by all samplers.

A problem supplies three things: exact draws from its prior, a proposal
move that leaves the prior invariant, and a log-likelihood. Everything the
engines do is built on those three operations, so any problem implementing
this interface can be sampled without touching engine code.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

__all__ = ["LikelihoodValue", "Model", "LEVEL_ZERO_CUTOFF"]


@dataclass(frozen=True, order=True, slots=True)
class LikelihoodValue:
    """A log-likelihood together with a uniform tiebreak scalar.

    Comparison is lexicographic: ``log_l`` first, ``tiebreak`` second. The
    tiebreak is drawn uniformly on [0, 1) when the likelihood is evaluated,
    which makes the order strict even on likelihood plateaus; quantiles and
    "worst particle" selections are then always well defined.
    """

    log_l: float
    tiebreak: float

    def as_tuple(self) -> tuple[float, float]:
        """The (log_l, tiebreak) pair; tuples compare the same way."""
        return (self.log_l, self.tiebreak)


#: Sentinel cutoff for the unconstrained (prior) level: every evaluated
#: likelihood compares strictly above it.
LEVEL_ZERO_CUTOFF = LikelihoodValue(-math.inf, 0.0)


class Model(ABC):
    """Abstract sampleable problem.

    Implementations must be immutable after construction so one instance can
    be shared by several engines; each engine owns its own random stream and
    passes it into every call.
    """

    #: Fixed dimension of the parameter vector.
    ndim: int

    @abstractmethod
    def from_prior(self, rng: np.random.Generator) -> np.ndarray:
        """Return one exact i.i.d. draw from the prior."""

    @abstractmethod
    def perturb(
        self, theta: np.ndarray, rng: np.random.Generator
    ) -> tuple[np.ndarray, float]:
        """Propose a move that keeps the prior invariant.

        Returns ``(proposal, log_correction)``. Accepting the proposal with
        probability ``min(1, exp(log_correction))`` (on top of any likelihood
        constraint) leaves the prior distribution invariant. Symmetric
        in-support moves return 0.0; proposals outside the prior support
        return ``-inf``, i.e. certain rejection, and their likelihood must
        not be evaluated.
        """

    @abstractmethod
    def log_l(self, theta: np.ndarray) -> float:
        """Plain log-likelihood at ``theta``; caller guarantees support."""

    def log_likelihood(
        self, theta: np.ndarray, rng: np.random.Generator
    ) -> LikelihoodValue:
        """Evaluate the likelihood and attach a fresh uniform tiebreak.

        Raises ``ValueError`` on a non-finite log-likelihood: that always
        indicates a broken model, and the engines abort rather than carry
        NaN/inf into the level bookkeeping.
        """
        value = float(self.log_l(theta))
        if not math.isfinite(value):
            raise ValueError(
                f"model returned non-finite log-likelihood {value!r} "
                f"at theta={np.asarray(theta)!r}"
            )
        return LikelihoodValue(value, float(rng.random()))
