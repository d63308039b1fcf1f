"""Monte Carlo estimates with exact, order-independent merging.

Sample ``i`` of a run always uses the substream ``rng.substream(i)``, so a
run split into replicas (or interrupted and resumed from a checkpoint)
visits exactly the same configurations as a single pass.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable

from .lattice import RngSpec

__all__ = ["Estimate", "run_samples", "CHECKPOINT_EVERY"]

CHECKPOINT_EVERY = 10**6


@dataclass(frozen=True)
class Estimate:
    """Accumulated sample sum and sum of squares.

    ``indicator`` estimates report the binomial standard error
    ``sqrt(p(1-p)/N)``; others the sample standard deviation over ``sqrt(N)``.
    With integer observables the accumulators are Python ints, so merging is
    exact and associative.
    """

    samples: int = 0
    total: int | float = 0
    total_sq: int | float = 0
    indicator: bool = False
    seed: int | None = None
    stream: int | None = None
    flags: frozenset = field(default_factory=frozenset)

    @property
    def mean(self) -> float:
        if self.samples == 0:
            return math.nan
        return self.total / self.samples

    @property
    def variance(self) -> float:
        n = self.samples
        if self.indicator:
            p = self.mean
            return p * (1 - p)
        if n < 2:
            return math.nan
        # exact integer arithmetic before the single division
        return (n * self.total_sq - self.total**2) / (n * (n - 1))

    @property
    def stderr(self) -> float:
        if self.samples == 0:
            return math.nan
        return math.sqrt(max(self.variance, 0.0) / self.samples)

    def add(self, value) -> "Estimate":
        return replace(
            self,
            samples=self.samples + 1,
            total=self.total + value,
            total_sq=self.total_sq + value * value,
        )

    def merge(self, other: "Estimate") -> "Estimate":
        if self.indicator != other.indicator:
            raise ValueError("cannot merge indicator and non-indicator estimates")
        seed = self.seed if self.seed == other.seed else None
        stream = self.stream if self.stream == other.stream else None
        return Estimate(
            self.samples + other.samples,
            self.total + other.total,
            self.total_sq + other.total_sq,
            self.indicator,
            seed,
            stream,
            self.flags | other.flags,
        )

    def flagged(self, *flags) -> "Estimate":
        return replace(self, flags=self.flags | frozenset(flags))

    def z_score(self, exact) -> float:
        """Distance to an exact value in units of the standard error at that value."""
        exact = float(exact)
        if self.indicator:
            se = math.sqrt(exact * (1 - exact) / self.samples)
        else:
            se = self.stderr
        diff = abs(self.mean - exact)
        if se == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / se

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "total": self.total,
            "total_sq": self.total_sq,
            "indicator": self.indicator,
            "seed": self.seed,
            "stream": self.stream,
            "flags": sorted(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Estimate":
        return cls(
            d["samples"], d["total"], d["total_sq"], d["indicator"], d["seed"], d["stream"],
            frozenset(d.get("flags", ())),
        )

    def __str__(self):
        return f"{self.mean:.6g} +- {self.stderr:.2g} (N={self.samples})"


def run_samples(
    observable: Callable[[RngSpec], int | bool],
    budget: int,
    rng: RngSpec,
    indicator: bool = False,
    checkpoint: str | os.PathLike | None = None,
    checkpoint_every: int = CHECKPOINT_EVERY,
    start: int = 0,
) -> Estimate:
    """Evaluate ``observable(rng.substream(i))`` for ``i`` in ``[start, budget)``.

    With ``checkpoint`` set, the accumulator is written every
    ``checkpoint_every`` samples and an existing checkpoint is resumed.
    """
    if budget <= 0:
        raise ValueError("sample budget must be positive")
    est = Estimate(indicator=indicator, seed=rng.seed, stream=rng.stream)
    i = start
    if checkpoint is not None and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            state = json.load(fh)
        if (state["seed"], state["stream"]) != (rng.seed, rng.stream):
            raise ValueError("checkpoint belongs to another RNG stream")
        est = Estimate.from_dict(state["estimate"])
        i = state["next"]
    total, total_sq, samples = est.total, est.total_sq, est.samples
    while i < budget:
        value = observable(rng.substream(i))
        if indicator:
            value = int(bool(value))
        total += value
        total_sq += value * value
        samples += 1
        i += 1
        if checkpoint is not None and (i % checkpoint_every == 0 or i == budget):
            est = replace(est, samples=samples, total=total, total_sq=total_sq)
            _write_checkpoint(checkpoint, rng, est, i)
    return replace(est, samples=samples, total=total, total_sq=total_sq)


def _write_checkpoint(path, rng, est, next_index):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump({"seed": rng.seed, "stream": rng.stream, "next": next_index, "estimate": est.to_dict()}, fh)
    os.replace(tmp, path)
