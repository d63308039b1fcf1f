"""Monte Carlo probabilities of the construction events."""

from __future__ import annotations

from dataclasses import dataclass

from .._validation import check_budget, check_count, check_probability
from ..estimate import Estimate
from ..events import crossing_cluster_check, event_g, event_o
from ..geometry import PartitionSpec, block_regions
from ..lattice import Region, RngSpec, sample_configuration

__all__ = ["EventOResult", "estimate_event_o", "estimate_event_g"]


@dataclass
class EventOResult:
    """P^(O^{m,s,t}) and the implication O => crossing cluster, sample by sample."""

    estimate: Estimate
    holds: int
    violations: int

    @property
    def implication_ok(self) -> bool:
        return self.violations == 0


def estimate_event_o(spec: PartitionSpec, n: int | None = None, p: float = 0.5, budget: int = 10_000,
                     rng: RngSpec = RngSpec(0), check_implication: bool = True) -> EventOResult:
    """Estimate P(O^{m,s,t}) on Lambda_n (default n = ms).

    On every sample where O holds, the crossing cluster check (one cluster
    crossing Lambda_ms both ways and containing every widest circuit) is
    evaluated; failures are counted as violations.
    """
    p = check_probability(p)
    budget = check_budget(budget)
    ms = spec.m * spec.s
    n = ms if n is None else check_count(n, "n")
    if n < ms:
        raise ValueError(f"Lambda_{n} does not contain Lambda_{ms}")
    window, big = Region.box(n), Region.box(ms)
    hits = violations = 0
    for i in range(budget):
        cfg = sample_configuration(window, p, rng.substream(i))
        if event_o(cfg, spec, big).holds:
            hits += 1
            if check_implication and not crossing_cluster_check(cfg, spec, n):
                violations += 1
    est = Estimate(budget, hits, hits, True, rng.seed, rng.stream)
    return EventOResult(est, hits, violations)


def estimate_event_g(spec: PartitionSpec, i: int = 0, j: int = 0, p: float = 0.5, budget: int = 10_000,
                     rng: RngSpec = RngSpec(0)) -> Estimate:
    """Estimate P(G_ij): a closed dual circuit in the annulus A_III of block (i, j)."""
    p = check_probability(p)
    budget = check_budget(budget)
    block = block_regions(spec, i, j).B
    hits = sum(
        event_g(sample_configuration(block, p, rng.substream(k)), spec, i, j) for k in range(budget)
    )
    return Estimate(budget, hits, hits, True, rng.seed, rng.stream)
