"""Single-sweep estimates of crossing-type probabilities for every p at once.

Each sample orders the edges of the box by their counter-based uniforms and
adds them one at a time with union-find, recording the number of edges k*
at which the event first occurs. Since the open set at parameter p is
{u_e < p}, the event holds for the direct sample at p (same substream)
exactly when #{u_e < p} >= k*. Averaging over the edge count instead, the
per-sample value P(Bin(M, p) >= k*) is an unbiased estimate with smaller
variance than the indicator.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import binom

from .. import _kernels
from .._validation import check_budget, check_count, check_probability
from ..lattice import RngSpec
from ..topology import _VARIANTS, crossing_nodes
from ._sampling import estimate_from, sample_values

__all__ = [
    "pi_thresholds",
    "hc_thresholds",
    "reweight",
    "estimate_pi_sweep",
    "estimate_hc_sweep",
]


def _n_edges(W, H):
    return (W - 1) * H + W * (H - 1)


def pi_thresholds(n: int, budget: int, rng: RngSpec, workers: int = 1) -> tuple[np.ndarray, int]:
    """Per-sample edge counts at which O joins the boundary of Lambda_n, and M = |E(Lambda_n)|."""
    n = check_count(n, "n")
    budget = check_budget(budget)
    side = 2 * n + 1
    source = np.zeros((side, side), np.bool_)
    source[n, n] = True
    target = np.zeros((side, side), np.bool_)
    target[0, :] = target[-1, :] = target[:, 0] = target[:, -1] = True
    nodes = np.ones((side, side), np.bool_)
    vals = sample_values(
        lambda key: _kernels.sweep_threshold(key, -n, -n, side, side, source, target, nodes),
        budget, rng, workers,
    )
    return vals, _n_edges(side, side)


def hc_thresholds(k: int, l: int, variant: str, budget: int, rng: RngSpec,
                  workers: int = 1) -> tuple[np.ndarray, int]:
    """Per-sample edge counts at which HC(k, l) first occurs, and M = |E([0,k] x [0,l])|."""
    k = check_count(k, "k", 1)
    l = check_count(l, "l", 1)
    budget = check_budget(budget)
    if variant not in _VARIANTS:
        raise ValueError(f"unknown crossing variant {variant!r}")
    W, H = k + 1, l + 1
    source = np.zeros((W, H), np.bool_)
    source[0, :] = True
    target = np.zeros((W, H), np.bool_)
    target[-1, :] = True
    nodes = crossing_nodes(W, H, variant)
    vals = sample_values(
        lambda key: _kernels.sweep_threshold(key, 0, 0, W, H, source, target, nodes),
        budget, rng, workers,
    )
    return vals, _n_edges(W, H)


def reweight(thresholds, n_edges: int, ps, rng: RngSpec) -> dict:
    """{p: Estimate} with per-sample values P(Bin(n_edges, p) >= k*)."""
    thresholds = np.asarray(thresholds)
    out = {}
    for p in ps:
        p = check_probability(p)
        values = binom.sf(thresholds - 1, n_edges, p)
        out[p] = estimate_from(values.astype(float), rng)
    return out


def estimate_pi_sweep(n: int, ps, budget: int, rng: RngSpec, workers: int = 1) -> dict:
    """{p: Estimate of pi_p(n)} from one sweep per sample."""
    thr, M = pi_thresholds(n, budget, rng, workers)
    return reweight(thr, M, ps, rng)


def estimate_hc_sweep(k: int, l: int, ps, variant: str, budget: int, rng: RngSpec,
                      workers: int = 1) -> dict:
    """{p: Estimate of P(HC(k, l))} from one sweep per sample."""
    thr, M = hc_thresholds(k, l, variant, budget, rng, workers)
    return reweight(thr, M, ps, rng)

