"""Indicators of the construction events and the checks built on them.

Restricted events ``A(W)`` are decided on the configuration completed with
open edges outside E(W) (on a window one block wider than W), with every
widest circuit recomputed on that completed configuration. Conditions whose
annulus or corridor shares no edge with E(W) hold automatically there and
are skipped.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .clusters import boundary_touch_count, label_clusters
from .estimate import Estimate
from .geometry import PartitionSpec, block_regions
from .lattice import Configuration, Region, RngSpec, SiteCoord, complete_outside, sample_configuration
from .topology import (
    Circuit,
    has_open_circuit_in_annulus,
    innermost_closed_dual_circuit,
    outermost_open_circuit,
)

__all__ = [
    "EventReport",
    "event_o",
    "event_g",
    "event_d",
    "crossing_cluster_check",
    "niceness_expectation",
    "MIN_ACCEPTED",
]

MIN_ACCEPTED = 200


@dataclass
class EventReport:
    holds: bool
    witnesses: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_json(self, include_witnesses: bool = False) -> str:
        out = {"holds": self.holds, "failures": list(self.failures)}
        if include_witnesses:
            wit = {}
            for name, w in self.witnesses.items():
                if isinstance(w, Circuit):
                    wit[name] = {"circuit": [list(s) for s in w.sites]}
                else:
                    wit[name] = {"path": [list(s) for s in w]}
            out["witnesses"] = wit
        return json.dumps(out, sort_keys=True)


def _shares_edge(a: Region, b: Region) -> bool:
    return (a & b).n_edges() > 0


def _locate(W: Region, spec: PartitionSpec):
    """('big', None) for Lambda_ms, ('block', (i, j)) for a block B_ij."""
    if W.kind == "box":
        n, cx, cy = W.params
        if n == spec.m * spec.s and (cx, cy) == (0, 0):
            return "big", None
        if n == spec.s and cx % (2 * spec.s) == 0 and cy % (2 * spec.s) == 0:
            ij = (cx // (2 * spec.s), cy // (2 * spec.s))
            if ij in spec.indices():
                return "block", ij
    raise ValueError("W must be Lambda_{ms} or one of the blocks B_ij of the partition")


@lru_cache(maxsize=256)
def _plan(spec: PartitionSpec, where: str, ij):
    """Completion hull, blocks, annuli to check and corridors to check."""
    s = spec.s
    W = Region.box(spec.m * s) if where == "big" else Region.box(s, spec.offset(*ij))
    if where == "big":
        reach, (ci, cj) = spec.half + 1, (0, 0)
        hull = Region.box(spec.m * s + 2 * s)
    else:
        reach, (ci, cj) = 1, ij
        hull = Region.box(3 * s, spec.offset(*ij))
    span = range(-reach, reach + 1)
    keys = sorted(((ci + a, cj + b) for a in span for b in span), key=lambda k: (k[1], k[0]))
    blocks = {k: block_regions(spec, *k) for k in keys}
    annuli = [k for k in keys if _shares_edge(blocks[k].A_II, W)]
    corridors = []
    for label, step in (("H", (1, 0)), ("V", (0, 1))):
        for k in keys:
            other = (k[0] + step[0], k[1] + step[1])
            corridor = getattr(blocks[k], label)
            if other in blocks and _shares_edge(corridor, W):
                corridors.append((f"{label}[{k[0]},{k[1]}]", corridor, k, other))
    return hull, blocks, annuli, corridors


def _path(h, v, nodes, sources, targets):
    """Shortest open path (grid indices) from sources to targets, BFS."""
    W, H = nodes.shape
    prev = {}
    queue = deque()
    for i, j in zip(*np.nonzero(sources & nodes)):
        prev[(i, j)] = None
        queue.append((i, j))
    while queue:
        i, j = queue.popleft()
        if targets[i, j]:
            out = [(i, j)]
            while prev[out[-1]] is not None:
                out.append(prev[out[-1]])
            return out[::-1]
        steps = []
        if i + 1 < W and h[i, j]:
            steps.append((i + 1, j))
        if i > 0 and h[i - 1, j]:
            steps.append((i - 1, j))
        if j + 1 < H and v[i, j]:
            steps.append((i, j + 1))
        if j > 0 and v[i, j - 1]:
            steps.append((i, j - 1))
        for nb in steps:
            if nodes[nb] and nb not in prev:
                prev[nb] = (i, j)
                queue.append(nb)
    return None


def _connected(config, corridor: Region, g1: Circuit, g2: Circuit, want_path: bool):
    h, v = config.open_within(corridor)
    shape = corridor.shape
    src = g1.region.mask_in(corridor.x0, corridor.y0, *shape) & corridor.mask
    dst = g2.region.mask_in(corridor.x0, corridor.y0, *shape) & corridor.mask
    if want_path:
        path = _path(h, v, np.asarray(corridor.mask), src, dst)
        if path is None:
            return False, None
        return True, [SiteCoord(int(corridor.x0 + i), int(corridor.y0 + j)) for i, j in path]
    reached = _kernels.flood(h, v, np.asarray(corridor.mask), src)
    return bool((reached & dst).any()), None


def event_o(
    config: Configuration,
    spec: PartitionSpec,
    W: Region,
    witnesses: bool = False,
    exhaustive: bool = False,
) -> EventReport:
    """O^{m,s,t} (W = Lambda_ms) or O_ij^{s,t} (W = B_ij) on ``config``.

    Checks, in order, (i) an open circuit in every annulus A_II, then (ii)
    every corridor H and (iii) every corridor V for an open path inside the
    corridor between the widest circuits of the two annuli it joins.
    Evaluation stops at the first failure unless ``exhaustive`` is set.
    """
    if not W.issubset(config.window):
        raise ValueError("W is not contained in the configuration window")
    hull, blocks, annuli, corridors = _plan(spec, *_locate(W, spec))
    completed = complete_outside(config, W, "open", window=hull | config.window)
    circuits: dict = {}

    def circuit(key):
        if key not in circuits:
            circuits[key] = outermost_open_circuit(completed, blocks[key].A_II)
        return circuits[key]

    report = EventReport(True)

    def fail(msg):
        report.holds = False
        report.failures.append(msg)
        return not exhaustive

    # (i) circuits in the annuli that meet E(W); existence first, it is cheaper
    for key in annuli:
        if not has_open_circuit_in_annulus(completed, blocks[key].A_II):
            if fail(f"A_II[{key[0]},{key[1]}]: no open circuit"):
                return report
            circuits[key] = None
    if witnesses:
        for key in annuli:
            if circuit(key) is not None:
                report.witnesses[f"A_II[{key[0]},{key[1]}]"] = circuit(key)
    # (ii), (iii) corridor connections
    for name, corridor, key, other in corridors:
        g1, g2 = circuit(key), circuit(other)
        if g1 is None or g2 is None:
            if fail(f"{name}: a circuit to connect is missing"):
                return report
            continue
        ok, path = _connected(completed, corridor, g1, g2, witnesses)
        if not ok:
            if fail(f"{name}: no open connection between the circuits of "
                    f"A_II[{key[0]},{key[1]}] and A_II[{other[0]},{other[1]}]"):
                return report
        elif witnesses:
            report.witnesses[name] = path
    return report


def event_g(config: Configuration, spec: PartitionSpec, i: int = 0, j: int = 0) -> bool:
    """Closed dual circuit in the annulus A_III of block (i, j)."""
    return innermost_closed_dual_circuit(config, block_regions(spec, i, j).A_III) is not None


def event_d(labeling, n: int, a: float, b: float, pi_hat: float) -> bool:
    """Some cluster of Lambda_n has size strictly inside (a n^2 pi, b n^2 pi)."""
    if not pi_hat > 0:
        raise ValueError("pi_hat must be positive")
    lo, hi = a * n * n * pi_hat, b * n * n * pi_hat
    return any(lo < size < hi for size in labeling.sizes.values())


def crossing_cluster(config: Configuration, spec: PartitionSpec):
    """Root label and labelling of the open cluster of Lambda_ms touching all four sides.

    At most one such cluster exists (any two would cross each other). Returns
    ``(labeling, root)`` with ``root = None`` when there is none.
    """
    big = Region.box(spec.m * spec.s)
    lab = label_clusters(config, big)
    L = lab.labels
    common = set(L[0, :]) & set(L[-1, :]) & set(L[:, 0]) & set(L[:, -1])
    common.discard(-1)
    root = next(iter(common)) if common else None
    return lab, root


def crossing_cluster_check(config: Configuration, spec: PartitionSpec, n: int | None = None,
                           require_circuits: bool = True) -> bool:
    """Whether an open cluster crosses Lambda_ms both horizontally and vertically.

    When ``require_circuits`` is set, the cluster must also contain every
    widest circuit gamma_ij (as it does on O^{m,s,t}).
    """
    if n is not None and spec.m * spec.s > n:
        raise ValueError("partition does not fit in Lambda_n")
    lab, root = crossing_cluster(config, spec)
    if root is None:
        return False
    if require_circuits:
        for i, j in spec.indices():
            gamma = outermost_open_circuit(config, block_regions(spec, i, j).A_II)
            if gamma is None or lab.label(gamma.sites[0]) != root:
                return False
    return True


def niceness_expectation(
    gamma: Circuit,
    spec: PartitionSpec,
    i: int = 0,
    j: int = 0,
    p: float = 0.5,
    budget: int = 10_000,
    rng: RngSpec = RngSpec(0),
    min_accepted: int = MIN_ACCEPTED,
) -> Estimate:
    """E[C~(A'_ij) | O_ij and gamma_ij = gamma] by rejection sampling.

    Configurations of B_ij are drawn until ``budget`` draws are spent; the
    accepted ones contribute C~(A'_ij). Fewer than ``min_accepted`` accepted
    draws flag the result ``insufficient-support``.
    """
    blk = block_regions(spec, i, j)
    if not gamma.region.issubset(blk.A_II):
        raise ValueError("candidate circuit does not lie in A_II")
    est = Estimate(seed=rng.seed, stream=rng.stream)
    for k in range(budget):
        cfg = sample_configuration(blk.B, p, rng.substream(k))
        if outermost_open_circuit(cfg, blk.A_II) != gamma:
            continue
        if not event_o(cfg, spec, blk.B).holds:
            continue
        est = est.add(boundary_touch_count(cfg, blk.A_prime))
    if est.samples < min_accepted:
        est = est.flagged("insufficient-support")
    return est
