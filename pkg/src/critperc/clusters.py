"""Open clusters restricted to a region and the cluster-size observables.

Every observable here is computed from one pass of a compiled kernel over
the region's bounding box: union-find labelling for cluster sizes, a flood
fill for "connected to a set" counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .lattice import Configuration, Region, SiteCoord
from .topology import Circuit

__all__ = [
    "ClusterLabeling",
    "label_clusters",
    "cluster_size_at",
    "max_cluster_size",
    "boundary_touch_count",
    "annulus_reach_count",
    "circuit_cluster_size",
    "circuit_reach",
    "c_in_out",
    "connected_to",
]


def _require_inside(region: Region, config: Configuration, what="region"):
    if not region.issubset(config.window):
        raise ValueError(f"{what} is not contained in the configuration window")


@dataclass(frozen=True)
class ClusterLabeling:
    """Open clusters of ``config`` using only edges of E(region).

    ``labels`` is indexed like ``region.mask``; sites outside the region
    carry -1. Labels are canonical roots, so two sites share a label iff
    they are joined by an open path inside the region.
    """

    region: Region
    config: Configuration
    labels: np.ndarray
    sizes: dict

    def label(self, v) -> int:
        x, y = v
        if (x, y) not in self.region:
            raise KeyError(f"site {SiteCoord(x, y)} is not in the region")
        return int(self.labels[x - self.region.x0, y - self.region.y0])

    def size(self, v) -> int:
        return self.sizes[self.label(v)]

    def size_array(self) -> np.ndarray:
        """Cluster size of every site (0 outside the region)."""
        flat = self.labels.ravel()
        counts = np.bincount(flat[flat >= 0], minlength=flat.size)
        out = np.where(flat >= 0, counts[np.maximum(flat, 0)], 0)
        return out.reshape(self.labels.shape)

    def partition(self) -> frozenset:
        """Clusters as a set of frozensets of sites."""
        groups: dict = {}
        x0, y0 = self.region.x0, self.region.y0
        for i, j in zip(*np.nonzero(self.labels >= 0)):
            groups.setdefault(int(self.labels[i, j]), set()).add(SiteCoord(int(x0 + i), int(y0 + j)))
        return frozenset(frozenset(g) for g in groups.values())

    def __len__(self):
        return len(self.sizes)


def label_clusters(config: Configuration, region: Region | None = None) -> ClusterLabeling:
    """Label the open clusters of ``config`` inside ``region`` (default: its window)."""
    region = config.window if region is None else region
    _require_inside(region, config)
    h, v = config.open_within(region)
    labels = _kernels.label(h, v, np.asarray(region.mask))
    roots, counts = np.unique(labels[labels >= 0], return_counts=True)
    sizes = {int(r): int(c) for r, c in zip(roots, counts)}
    return ClusterLabeling(region, config, labels, sizes)


def cluster_size_at(labeling: ClusterLabeling, v) -> int:
    """C(v): number of sites joined to ``v`` inside the labelled region."""
    return labeling.size(v)


def max_cluster_size(labeling: ClusterLabeling) -> int:
    """M = largest cluster size over the region."""
    if not labeling.sizes:
        raise ValueError("empty region has no clusters")
    return max(labeling.sizes.values())


def connected_to(config: Configuration, region: Region, targets: Region) -> np.ndarray:
    """Mask (over ``region``'s box) of sites joined to ``targets`` inside ``region``."""
    W, H = region.shape
    h, v = config.open_within(region)
    seeds = targets.mask_in(region.x0, region.y0, W, H) & region.mask
    return _kernels.flood(h, v, np.asarray(region.mask), seeds)


def boundary_touch_count(config: Configuration, W: Region) -> int:
    """Sites of W joined to its boundary by an open path inside W."""
    _require_inside(W, config, "W")
    return int(connected_to(config, W, W.boundary()).sum())


def annulus_reach_count(config: Configuration, m: int) -> int:
    """Y(m): sites of Lambda_m joined to the boundary of Lambda_2m inside Lambda_2m."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    big = Region.box(2 * m)
    if not big.issubset(config.window):
        raise ValueError(f"window does not contain Lambda_{2 * m}")
    reached = connected_to(config, big, big.boundary())
    return int(reached[m: 3 * m + 1, m: 3 * m + 1].sum())


def _require_primal(gamma: Circuit):
    if not isinstance(gamma, Circuit):
        raise TypeError(f"expected a Circuit, got {type(gamma).__name__}")
    if gamma.dual:
        raise ValueError("cluster observables need an open (primal) circuit")


def circuit_cluster_size(config: Configuration, gamma: Circuit) -> int:
    """C^gamma: interior sites joined to gamma inside Int(gamma) plus gamma."""
    _require_primal(gamma)
    closure = gamma.closure()
    _require_inside(closure, config, "circuit closure")
    reached = connected_to(config, closure, gamma.region)
    inside = gamma.interior.mask_in(closure.x0, closure.y0, *closure.shape)
    return int((reached & inside).sum())


def circuit_reach(config: Configuration, gamma: Circuit | None, W: Region) -> int:
    """Sites of W joined to gamma by open paths in the window; 0 without a circuit."""
    if gamma is None:
        return 0
    _require_primal(gamma)
    _require_inside(W, config, "W")
    _require_inside(gamma.region, config, "circuit")
    window = config.window
    reached = connected_to(config, window, gamma.region)
    return int((reached & W.mask_in(window.x0, window.y0, *window.shape)).sum())


def c_in_out(config: Configuration, circuits: Iterable[Circuit]) -> tuple[int, int]:
    """(c_in, c_out) for a family of pairwise non-nested open circuits.

    ``c_in`` adds up C^gamma over the circuits; ``c_out`` counts the circuit
    sites plus the sites outside every circuit that are joined to one of them.
    """
    circuits = list(circuits)
    window = config.window
    shape = window.shape
    covered = np.zeros(shape, bool)
    on_circuit = np.zeros(shape, bool)
    for gamma in circuits:
        _require_primal(gamma)
        closure = gamma.closure()
        _require_inside(closure, config, "circuit closure")
        cm = closure.mask_in(window.x0, window.y0, *shape)
        if (covered & cm).any():
            raise ValueError("circuits overlap or are nested")
        covered |= cm
        on_circuit |= gamma.region.mask_in(window.x0, window.y0, *shape)
    c_in = sum(circuit_cluster_size(config, g) for g in circuits)
    if not circuits:
        return 0, 0
    h, v = config.open_within(window)
    reached = _kernels.flood(h, v, np.asarray(window.mask), on_circuit)
    c_out = int(on_circuit.sum() + (reached & ~covered).sum())
    return c_in, c_out
