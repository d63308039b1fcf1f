"""Direct Monte Carlo estimators of the basic one-scale quantities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from .._validation import check_budget, check_count, check_probability
from ..estimate import Estimate
from ..lattice import RngSpec
from ..topology import _VARIANTS, crossing_nodes
from . import _sampling
from ._sampling import estimate_from, sample_values, sampled_estimate

__all__ = [
    "estimate_pi",
    "radius_samples",
    "estimate_pi_curve",
    "estimate_hc",
    "max_cluster_samples",
    "estimate_max_cluster",
    "boundary_touch_samples",
    "y_samples",
    "LengthResult",
    "estimate_characteristic_length",
]


def estimate_pi(n: int, p: float, budget: int, rng: RngSpec, workers: int = 1, checkpoint=None) -> Estimate:
    """pi_p(n) = P(O joined to the boundary of Lambda_n inside Lambda_n)."""
    n = check_count(n, "n")
    p = check_probability(p)
    budget = check_budget(budget)
    return sampled_estimate(
        lambda key: _kernels.origin_radius(key, p, n) >= n,
        budget, rng, indicator=True, workers=workers, checkpoint=checkpoint,
    )


def radius_samples(n_max: int, p: float, budget: int, rng: RngSpec, workers: int = 1) -> np.ndarray:
    """Sup-norm radius of the cluster of O inside Lambda_{n_max}, per sample.

    O reaches the boundary of Lambda_n iff this radius is >= n, for every
    n <= n_max at once.
    """
    n_max = check_count(n_max, "n_max")
    p = check_probability(p)
    budget = check_budget(budget)
    return sample_values(lambda key: _kernels.origin_radius(key, p, n_max), budget, rng, workers)


def estimate_pi_curve(ns, p: float, budget: int, rng: RngSpec, workers: int = 1) -> dict:
    """{n: Estimate of pi_p(n)} from a single radius sweep (estimates are correlated)."""
    ns = sorted({check_count(n, "n") for n in ns})
    radii = radius_samples(ns[-1], p, budget, rng, workers)
    return {n: estimate_from(radii >= n, rng, indicator=True) for n in ns}


def _hc_fn(k, l, p, variant):
    W, H = k + 1, l + 1
    nodes = crossing_nodes(W, H, variant)
    seeds = np.zeros((W, H), np.bool_)
    seeds[0, :] = True

    def fn(key):
        h, v = _kernels.rect_states(key, p, 0, 0, W, H)
        return _kernels.flood(h, v, nodes, seeds)[-1, :].any()

    return fn


def estimate_hc(k: int, l: int, p: float, variant: str, budget: int, rng: RngSpec,
                workers: int = 1, checkpoint=None) -> Estimate:
    """P(HC(k, l)): open left-right crossing of [0, k] x [0, l]."""
    k = check_count(k, "k", 1)
    l = check_count(l, "l", 1)
    p = check_probability(p)
    budget = check_budget(budget)
    if variant not in _VARIANTS:
        raise ValueError(f"unknown crossing variant {variant!r}")
    return sampled_estimate(_hc_fn(k, l, p, variant), budget, rng, indicator=True,
                            workers=workers, checkpoint=checkpoint)


def max_cluster_samples(n: int, p: float, budget: int, rng: RngSpec, workers: int = 1) -> np.ndarray:
    """M_n (largest open cluster of Lambda_n), per sample."""
    n = check_count(n, "n")
    p = check_probability(p)
    budget = check_budget(budget)
    return sample_values(lambda key: _sampling.max_cluster(key, p, n), budget, rng, workers)


def estimate_max_cluster(n: int, p: float, budget: int, rng: RngSpec, workers: int = 1, checkpoint=None) -> Estimate:
    n = check_count(n, "n")
    p = check_probability(p)
    budget = check_budget(budget)
    return sampled_estimate(lambda key: _sampling.max_cluster(key, p, n), budget, rng,
                            workers=workers, checkpoint=checkpoint)


def boundary_touch_samples(k: int, n: int, p: float, budget: int, rng: RngSpec, workers: int = 1) -> np.ndarray:
    """C~(Lambda_{k,n}), per sample."""
    k = check_count(k, "k")
    n = check_count(n, "n")
    p = check_probability(p)
    budget = check_budget(budget)
    return sample_values(lambda key: _sampling.boundary_touch(key, p, k, n), budget, rng, workers)


def y_samples(m: int, p: float, budget: int, rng: RngSpec, workers: int = 1) -> np.ndarray:
    """Y(m), per sample."""
    m = check_count(m, "m")
    p = check_probability(p)
    budget = check_budget(budget)
    return sample_values(lambda key: _sampling.annulus_reach(key, p, m), budget, rng, workers)


@dataclass
class LengthResult:
    """Outcome of the characteristic-length scan.

    ``value`` is the first n whose crossing estimate is past the threshold
    by 3 standard errors, or None when no n <= n_max qualified (read as
    ">= n_max"). ``unresolved`` lists the sizes whose estimate was within 3
    standard errors of the threshold.
    """

    p: float
    eps: float
    n_max: int
    value: int | None
    unresolved: list = field(default_factory=list)
    table: dict = field(default_factory=dict)

    @property
    def at_least(self) -> bool:
        return self.value is None

    def __str__(self):
        return f">= {self.n_max}" if self.value is None else str(self.value)


def estimate_characteristic_length(
    p: float,
    eps: float = 0.25,
    n_max: int = 64,
    budget: int = 10_000,
    rng: RngSpec = RngSpec(0),
    variant: str = "standard",
    workers: int = 1,
) -> LengthResult:
    """L_eps(p) from HC(n, n) estimates for n = 1 .. n_max.

    For p < 1/2 the threshold is crossed when P^ + 3 se <= eps, for p > 1/2
    when P^ - 3 se > 1 - eps. At p = 1/2 the length is infinite and nothing
    is sampled.

    The default crossing variant is ``standard``: under ``paper-strict`` the
    3 x 3 square only admits the path through its centre, so P(HC(2, 2)) =
    p^2 <= 1/4 for every p < 1/2 and the length collapses to at most 2.
    """
    p = check_probability(p, closed=False)
    if not 0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    n_max = check_count(n_max, "n_max", 1)
    result = LengthResult(p, eps, n_max, None)
    if p == 0.5:
        return result
    for n in range(1, n_max + 1):
        est = estimate_hc(n, n, p, variant, budget, rng.child(f"hc/{n}"), workers)
        result.table[n] = est
        margin = 3 * est.stderr
        if p < 0.5:
            passed = est.mean + margin <= eps
            ambiguous = not passed and est.mean - margin <= eps
        else:
            passed = est.mean - margin > 1 - eps
            ambiguous = not passed and est.mean + margin > 1 - eps
        if passed:
            result.value = n
            return result
        if ambiguous:
            result.unresolved.append(n)
    return result
