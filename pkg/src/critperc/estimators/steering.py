"""Steering a sum of independent variables into a window.

For independent X_1..X_k with P(X_i in (alpha/k, (beta-alpha)/2)) >= eta1
and P(X_i <= (beta-alpha)/(2k)) >= eta2, the sum lands in (alpha, beta) with
probability at least (eta1 ^ eta2)^k: walk through the variables, asking for
a mid-size step while the partial sum is below alpha and for a small step
afterwards.

The walk needs X_i >= 0. With a negative atom a small step can drag the sum
back below alpha; e.g. k = 3, alpha = 1, beta = 4 and X_i uniform on
{1.4, -100} satisfy the other hypotheses with eta1 = eta2 = 1/2, yet the sum
never lies in (1, 4). Instances are therefore validated for nonnegative
support as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .. import _kernels
from .._validation import check_budget
from ..estimate import Estimate
from ..lattice import RngSpec

__all__ = [
    "MAX_PRODUCT_SUPPORT",
    "SteeringHypothesisError",
    "SteeringInstance",
    "sum_law",
    "window_probability",
    "steering_oracle",
    "steering_simulate",
    "all_steps_proper",
    "demo_instance",
    "random_instance",
]

MAX_PRODUCT_SUPPORT = 10**6


class SteeringHypothesisError(ValueError):
    """An instance violates a hypothesis; ``clause`` names it."""

    def __init__(self, clause: str, detail: str = ""):
        super().__init__(f"hypothesis violated: {clause}" + (f" ({detail})" if detail else ""))
        self.clause = clause


def _dist(d) -> dict:
    """{value: probability} with exact rational keys and weights."""
    items = d.items() if isinstance(d, dict) else d
    out: dict = {}
    for value, prob in items:
        value, prob = Fraction(value), Fraction(prob)
        out[value] = out.get(value, 0) + prob
    return out


@dataclass(frozen=True)
class SteeringInstance:
    """k finite distributions with the window (alpha, beta) and levels eta1, eta2.

    Distributions are given as ``{value: prob}`` or ``[(value, prob), ...]``;
    values and probabilities are converted to exact fractions (a float is
    taken at its exact binary value, a string like ``"0.4"`` as a decimal).
    With ``eta1``/``eta2`` omitted, the largest admissible levels are used.
    """

    alpha: Fraction
    beta: Fraction
    distributions: tuple
    eta1: Fraction | None = None
    eta2: Fraction | None = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "alpha", Fraction(self.alpha))
        set_(self, "beta", Fraction(self.beta))
        set_(self, "distributions", tuple(_dist(d) for d in self.distributions))
        k = self.k
        if k < 1:
            raise SteeringHypothesisError("k >= 1")
        if not self.alpha < self.beta:
            raise SteeringHypothesisError("alpha < beta", f"alpha={self.alpha}, beta={self.beta}")
        if not self.alpha / k < self.mid_high:
            raise SteeringHypothesisError("alpha/k < (beta-alpha)/2")
        for i, d in enumerate(self.distributions):
            if any(p < 0 for p in d.values()) or sum(d.values()) != 1:
                raise SteeringHypothesisError("probabilities form a distribution", f"X_{i + 1}")
            if min(v for v, p in d.items() if p > 0) < 0:
                raise SteeringHypothesisError("X_i >= 0", f"X_{i + 1}")
        mids = [self.mid_mass(d) for d in self.distributions]
        lows = [self.low_mass(d) for d in self.distributions]
        set_(self, "eta1", min(mids) if self.eta1 is None else Fraction(self.eta1))
        set_(self, "eta2", min(lows) if self.eta2 is None else Fraction(self.eta2))
        if not self.eta1 > 0:
            raise SteeringHypothesisError("eta1 > 0")
        if not self.eta2 > 0:
            raise SteeringHypothesisError("eta2 > 0")
        for i, (mid, low) in enumerate(zip(mids, lows)):
            if mid < self.eta1:
                raise SteeringHypothesisError(
                    "P(X_i in (alpha/k, (beta-alpha)/2)) >= eta1", f"X_{i + 1}: {mid} < {self.eta1}")
            if low < self.eta2:
                raise SteeringHypothesisError(
                    "P(X_i <= (beta-alpha)/(2k)) >= eta2", f"X_{i + 1}: {low} < {self.eta2}")

    @property
    def k(self) -> int:
        return len(self.distributions)

    @property
    def mid_high(self) -> Fraction:
        return (self.beta - self.alpha) / 2

    @property
    def low_high(self) -> Fraction:
        return (self.beta - self.alpha) / (2 * self.k)

    def mid_mass(self, d) -> Fraction:
        lo, hi = self.alpha / self.k, self.mid_high
        return sum((p for v, p in d.items() if lo < v < hi), Fraction(0))

    def low_mass(self, d) -> Fraction:
        return sum((p for v, p in d.items() if v <= self.low_high), Fraction(0))

    @property
    def bound(self) -> Fraction:
        """(eta1 ^ eta2)^k."""
        return min(self.eta1, self.eta2) ** self.k

    @property
    def support_product(self) -> int:
        return math.prod(len(d) for d in self.distributions)


def sum_law(distributions: Sequence) -> dict:
    """Exact law of the sum of independent finite variables (no hypotheses checked)."""
    law = {Fraction(0): Fraction(1)}
    for d in distributions:
        d = _dist(d)
        new: dict = {}
        for s, ps in law.items():
            for v, pv in d.items():
                new[s + v] = new.get(s + v, 0) + ps * pv
        law = new
    return law


def window_probability(distributions: Sequence, alpha, beta) -> Fraction:
    """P(alpha < X_1 + ... + X_k < beta), exactly."""
    alpha, beta = Fraction(alpha), Fraction(beta)
    return sum((p for s, p in sum_law(distributions).items() if alpha < s < beta), Fraction(0))


def steering_oracle(instance: SteeringInstance) -> Fraction:
    """Exact P(sum in (alpha, beta)); product support is capped at 10^6."""
    if instance.support_product > MAX_PRODUCT_SUPPORT:
        raise ValueError(
            f"product support {instance.support_product} exceeds the oracle cap {MAX_PRODUCT_SUPPORT}")
    return window_probability(instance.distributions, instance.alpha, instance.beta)


def all_steps_proper(instance: SteeringInstance, xs) -> bool:
    """Whether every step of the walk is proper for the outcome ``xs``.

    Step i is proper when the partial sum before it is below alpha and X_i
    is mid-size, or the partial sum is at least alpha and X_i is small.
    """
    total = Fraction(0)
    lo, hi, small = instance.alpha / instance.k, instance.mid_high, instance.low_high
    for x in xs:
        x = Fraction(x)
        if total < instance.alpha:
            if not lo < x < hi:
                return False
        elif not x <= small:
            return False
        total += x
    return True


def steering_simulate(instance: SteeringInstance, budget: int, rng: RngSpec) -> Estimate:
    """Monte Carlo P(sum in (alpha, beta)) by inverse-CDF sampling.

    Draw i of variable j uses the counter-based uniform at (i, j), so the
    result depends only on (instance, budget, rng).
    """
    budget = check_budget(budget)
    tables = []
    for d in instance.distributions:
        values = sorted(d)
        tables.append((np.array([float(v) for v in values]),
                       np.cumsum([float(d[v]) for v in values])))
    alpha, beta = float(instance.alpha), float(instance.beta)
    hits = 0
    chunk = 1 << 16
    for start in range(0, budget, chunk):
        rows = min(chunk, budget - start)
        u = _kernels.uniforms(rng.child(f"rows/{start}").key, rows, instance.k)
        total = np.zeros(rows)
        for j, (values, cum) in enumerate(tables):
            idx = np.minimum(np.searchsorted(cum, u[:, j], side="right"), len(values) - 1)
            total += values[idx]
        hits += int(((total > alpha) & (total < beta)).sum())
    return Estimate(budget, hits, hits, True, rng.seed, rng.stream)


def demo_instance() -> SteeringInstance:
    """k = 2, (alpha, beta) = (1, 3), X_i uniform on {0.4, 0.7}: exact 3/4 against 1/4."""
    half = Fraction(1, 2)
    d = {Fraction(2, 5): half, Fraction(7, 10): half}
    return SteeringInstance(1, 3, (d, d), half, half)


def random_instance(gen: np.random.Generator, max_k: int = 5, max_support: int = 8,
                    max_product: int = MAX_PRODUCT_SUPPORT) -> SteeringInstance:
    """A random instance satisfying every hypothesis (decimal values, rational weights).

    Every distribution puts mass on a mid-size value and on a small value;
    the remaining atoms are spread over [0, 2 beta].
    """
    k = int(gen.integers(1, max_k + 1))
    alpha = Fraction(int(gen.integers(50, 500)), 100)
    beta = alpha + 2 * alpha / k * Fraction(int(gen.integers(110, 400)), 100)
    lo, hi, small = alpha / k, (beta - alpha) / 2, (beta - alpha) / (2 * k)
    cap = max(2, int(max_product ** (1 / k)))

    def draw(a, b):
        # decimal point strictly inside (a, b), or in [a, b] for the small range
        x = Fraction(round(float(a + (b - a) * Fraction(gen.uniform(0.02, 0.98))), 4)).limit_denominator(10**4)
        return x if a < x < b else (a + b) / 2

    dists = []
    for _ in range(k):
        size = int(gen.integers(2, min(max_support, cap) + 1))
        values = [draw(lo, hi), draw(Fraction(0), small)]
        values += [draw(Fraction(0), 2 * beta) for _ in range(size - 2)]
        weights = [int(w) for w in gen.integers(1, 20, size)]
        total = sum(weights)
        dists.append([(v, Fraction(w, total)) for v, w in zip(values, weights)])
    return SteeringInstance(alpha, beta, dists)
