"""Built-in problems.

``twin_gaussian`` is the 20-dimensional bimodal benchmark: a broad Gaussian
at the origin plus a narrow, 100-times-heavier Gaussian offset to
(0.031, ..., 0.031), under a uniform prior on the [-0.5, 0.5] box. Its
evidence is ln(101) to very good approximation, and the off-centre narrow
mode gives the posterior both a phase transition and genuine bimodality.

``analytic_gaussian`` is a single-mode oracle with the same prior and walk:
its evidence and information are computable analytically / by quadrature,
so it calibrates the engines independently of the hard benchmark.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from .model import Model

__all__ = [
    "UniformBoxWalk",
    "TwinGaussian",
    "AnalyticGaussian",
    "make_problem",
    "PROBLEM_NAMES",
    "STEP_LOG10_MIN",
    "STEP_LOG10_MAX",
]

# Random-walk step sizes are drawn log-uniform (Jeffreys) from
# [10^STEP_LOG10_MIN, 10^STEP_LOG10_MAX] at every proposal, so no per-run
# step-size tuning is needed: small and large moves are both always on offer.
STEP_LOG10_MIN = -6.0
STEP_LOG10_MAX = 0.0

_LOG_2PI = math.log(2.0 * math.pi)


def draw_step_size(rng: np.random.Generator) -> float:
    """One step-size draw from the Jeffreys scheme (log-uniform)."""
    return 10.0 ** rng.uniform(STEP_LOG10_MIN, STEP_LOG10_MAX)


class UniformBoxWalk(Model):
    """Uniform prior on [-0.5, 0.5]^ndim with a one-coordinate random walk.

    The proposal picks a single coordinate uniformly at random and adds
    S * z with z standard normal and S from the Jeffreys step-size scheme.
    The move is symmetric, so the Metropolis correction is 0 in support and
    -inf outside the box.
    """

    def __init__(self, ndim: int):
        if ndim < 1:
            raise ValueError(f"ndim must be positive, got {ndim}")
        self.ndim = int(ndim)

    def from_prior(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-0.5, 0.5, size=self.ndim)

    def perturb(
        self, theta: np.ndarray, rng: np.random.Generator
    ) -> tuple[np.ndarray, float]:
        proposal = theta.copy()
        i = int(rng.integers(self.ndim))
        step = 10.0 ** rng.uniform(STEP_LOG10_MIN, STEP_LOG10_MAX)
        proposal[i] += step * rng.standard_normal()
        if proposal[i] < -0.5 or proposal[i] > 0.5:
            return proposal, -math.inf
        return proposal, 0.0


class TwinGaussian(UniformBoxWalk):
    """The bimodal twin-Gaussian benchmark (fixed constants).

    L(x) = prod_i N(x_i; 0, v^2) + 100 * prod_i N(x_i; 0.031, u^2)
    with v = 0.1, u = 0.01 in 20 dimensions. The two product terms are
    combined with logaddexp, so the value stays finite even where one
    branch underflows (the broad product alone spans ~e^{+28} to e^{-1000}).
    """

    DIM = 20
    BROAD_WIDTH = 0.1
    NARROW_WIDTH = 0.01
    NARROW_SHIFT = 0.031
    NARROW_WEIGHT = 100.0

    def __init__(self):
        super().__init__(self.DIM)
        d = self.ndim
        s = self.NARROW_SHIFT
        self._inv_2v2 = 0.5 / self.BROAD_WIDTH**2
        self._inv_2u2 = 0.5 / self.NARROW_WIDTH**2
        self._broad_norm = -d * (math.log(self.BROAD_WIDTH) + 0.5 * _LOG_2PI)
        self._narrow_norm = (
            math.log(self.NARROW_WEIGHT)
            - d * (math.log(self.NARROW_WIDTH) + 0.5 * _LOG_2PI)
        )
        self._two_shift = 2.0 * s
        self._shift_sq_sum = d * s * s

    def log_l(self, theta: np.ndarray) -> float:
        # |theta - s|^2 expanded around |theta|^2 shares the dot product
        # between the two mixture terms; logaddexp done in scalar math.
        qq = float(theta @ theta)
        broad = self._broad_norm - self._inv_2v2 * qq
        shifted = qq - self._two_shift * float(theta.sum()) + self._shift_sq_sum
        narrow = self._narrow_norm - self._inv_2u2 * shifted
        if broad >= narrow:
            return broad + math.log1p(math.exp(narrow - broad))
        return narrow + math.log1p(math.exp(broad - narrow))

    @staticmethod
    def true_log_evidence() -> float:
        """ln(1 + 100): both modes carry essentially all their Gaussian
        mass inside the prior box, so Z = 1 + 100 up to ~1e-5 relative."""
        return math.log(101.0)


class AnalyticGaussian(UniformBoxWalk):
    """Single centred Gaussian mode; evidence and information are known.

    L(x) = prod_i N(x_i; 0, width^2) on the same box prior. Dimension and
    width are configurable, which makes cheap low-dimensional calibration
    runs possible.
    """

    def __init__(self, ndim: int = 20, width: float = 0.1):
        super().__init__(ndim)
        if width <= 0:
            raise ValueError(f"width must be positive, got {width}")
        self.width = float(width)
        self._inv_2v2 = 0.5 / width**2
        self._norm = -self.ndim * (math.log(width) + 0.5 * _LOG_2PI)

    def log_l(self, theta: np.ndarray) -> float:
        return self._norm - self._inv_2v2 * float(theta @ theta)

    def true_log_evidence(self) -> float:
        """Exact box integral: per-dimension Gaussian mass on [-0.5, 0.5]
        is erf(0.5 / (width * sqrt(2))), and the product factorizes."""
        return self.ndim * math.log(math.erf(0.5 / (self.width * math.sqrt(2.0))))

    def true_information(self) -> float:
        """Prior-to-posterior divergence H by one-dimensional quadrature.

        H = E_posterior[ln L] - ln Z; both sides factorize over dimensions,
        so a single 1-d integral of N(x) * ln N(x) over the box suffices.
        """
        w = self.width
        z1 = math.erf(0.5 / (w * math.sqrt(2.0)))

        def integrand(x: float) -> float:
            log_n = -0.5 * (x / w) ** 2 - math.log(w) - 0.5 * _LOG_2PI
            return math.exp(log_n) * log_n

        mean_log_n, _ = quad(integrand, -0.5, 0.5, epsabs=1e-12, epsrel=1e-12)
        return self.ndim * (mean_log_n / z1 - math.log(z1))


PROBLEM_NAMES = ("twin_gaussian", "analytic_gaussian")


def make_problem(
    name: str, dimension: int | None = None, width: float | None = None
) -> Model:
    """Build a problem by registry name.

    ``dimension`` and ``width`` are accepted for ``analytic_gaussian`` only;
    the twin-Gaussian constants are fixed.
    """
    if name == "twin_gaussian":
        if dimension is not None or width is not None:
            raise ValueError(
                "twin_gaussian has fixed constants; "
                "dimension/width can only be set for analytic_gaussian"
            )
        return TwinGaussian()
    if name == "analytic_gaussian":
        return AnalyticGaussian(
            ndim=20 if dimension is None else dimension,
            width=0.1 if width is None else width,
        )
    raise ValueError(f"unknown problem {name!r}; choose one of {PROBLEM_NAMES}")
