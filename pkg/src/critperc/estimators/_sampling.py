"""Replica-parallel sampling with results independent of the worker count.

Sample ``i`` is always drawn from ``rng.substream(i)``. Workers compute
disjoint index ranges into one preallocated array and never touch a shared
accumulator; reduction happens once, in index order, so the same budget and
seed give bit-identical estimates for any number of workers.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .. import _kernels
from .._rng import as_u64, substream
from ..estimate import CHECKPOINT_EVERY, Estimate, _write_checkpoint
from ..lattice import RngSpec

__all__ = ["sample_values", "estimate_from", "sampled_estimate", "stream_keys"]

_CHUNK = 4096


def stream_keys(rng: RngSpec, start: int, stop: int) -> np.ndarray:
    """Generator keys of the substreams ``start .. stop-1``."""
    base = as_u64(rng.stream)
    return np.array(
        [RngSpec(rng.seed, int(substream(base, as_u64(i)))).key for i in range(start, stop)],
        dtype=np.uint64,
    )


def sample_values(
    fn: Callable[[np.uint64], float],
    budget: int,
    rng: RngSpec,
    workers: int = 1,
    dtype=np.int64,
    start: int = 0,
) -> np.ndarray:
    """``fn(key_i)`` for samples ``i = start .. budget-1`` (keys of ``rng.substream(i)``)."""
    out = np.empty(budget - start, dtype=dtype)

    def run(lo, hi):
        keys = stream_keys(rng, lo, hi)
        for k in range(hi - lo):
            out[lo - start + k] = fn(keys[k])

    bounds = [(lo, min(lo + _CHUNK, budget)) for lo in range(start, budget, _CHUNK)]
    if workers <= 1 or len(bounds) == 1:
        for lo, hi in bounds:
            run(lo, hi)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(lambda b: run(*b), bounds))
    return out


def estimate_from(values, rng: RngSpec, indicator: bool = False) -> Estimate:
    """Estimate over a sample array; integer arrays accumulate exactly."""
    values = np.asarray(values)
    if indicator:
        values = values.astype(bool)
    if values.dtype.kind in "biu":
        ints = [int(x) for x in values.astype(np.int64)]
        total = sum(ints)
        total_sq = sum(x * x for x in ints)
    else:
        total = float(np.sum(values))
        total_sq = float(np.sum(values * values))
    return Estimate(len(values), total, total_sq, indicator, rng.seed, rng.stream)


def sampled_estimate(
    fn: Callable[[np.uint64], float],
    budget: int,
    rng: RngSpec,
    indicator: bool = False,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
    checkpoint_every: int = CHECKPOINT_EVERY,
) -> Estimate:
    """Estimate of ``fn`` over ``budget`` samples, checkpointed in fixed blocks.

    An interrupted run resumed from its checkpoint reaches the same
    accumulator as an uninterrupted one.
    """
    if budget <= 0:
        raise ValueError("sample budget must be positive")
    est = Estimate(indicator=indicator, seed=rng.seed, stream=rng.stream)
    start = 0
    if checkpoint is not None and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            state = json.load(fh)
        if (state["seed"], state["stream"]) != (rng.seed, rng.stream):
            raise ValueError("checkpoint belongs to another RNG stream")
        est = Estimate.from_dict(state["estimate"])
        start = state["next"]
    dtype = np.int64 if indicator else np.float64
    while start < budget:
        stop = min(budget, (start // checkpoint_every + 1) * checkpoint_every)
        vals = sample_values(fn, stop, rng, workers, dtype, start)
        if not indicator and np.all(vals == np.round(vals)) and np.abs(vals).max(initial=0) < 2**52:
            vals = vals.astype(np.int64)
        est = est.merge(estimate_from(vals, rng, indicator))
        start = stop
        if checkpoint is not None:
            _write_checkpoint(checkpoint, rng, est, start)
    return est


# -- per-sample observables on full boxes ---------------------------------


def max_cluster(key, p, n):
    """M_n on Lambda_n."""
    side = 2 * n + 1
    h, v = _kernels.rect_states(key, p, -n, -n, side, side)
    labels = _kernels.label(h, v, np.ones((side, side), np.bool_))
    return _kernels.max_label_size(labels)


def boundary_touch(key, p, k, n):
    """C~(Lambda_{k,n}): sites joined to the boundary inside the rectangle."""
    W, H = 2 * k + 1, 2 * n + 1
    h, v = _kernels.rect_states(key, p, -k, -n, W, H)
    seeds = np.zeros((W, H), np.bool_)
    seeds[0, :] = seeds[-1, :] = seeds[:, 0] = seeds[:, -1] = True
    return int(_kernels.flood(h, v, np.ones((W, H), np.bool_), seeds).sum())


def annulus_reach(key, p, m):
    """Y(m): sites of Lambda_m joined to the boundary of Lambda_2m inside it."""
    side = 4 * m + 1
    h, v = _kernels.rect_states(key, p, -2 * m, -2 * m, side, side)
    seeds = np.zeros((side, side), np.bool_)
    seeds[0, :] = seeds[-1, :] = seeds[:, 0] = seeds[:, -1] = True
    reached = _kernels.flood(h, v, np.ones((side, side), np.bool_), seeds)
    return int(reached[m: 3 * m + 1, m: 3 * m + 1].sum())
