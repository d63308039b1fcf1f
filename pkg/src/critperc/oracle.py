"""Exact probabilities by exhaustive enumeration over a few edges.

Configurations are visited in Gray-code order, so consecutive ones differ in
a single edge. For every observable the enumerator keeps one exact sum per
number of open variable edges; the weight ``p^k (1-p)^(n-k)`` is applied once
at the end with rational arithmetic. With ``p = 1/2`` every result is a
dyadic rational with denominator ``2^n``.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import Executor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .lattice import Configuration, EdgeId, HORIZONTAL, Region, SiteCoord, _as_edge

__all__ = [
    "MAX_VARIABLE_EDGES",
    "EnumerationTask",
    "enumerate_probability",
    "enumerate_expectation",
    "enumerate_distribution",
    "enumerate_conditional_expectation",
    "named_observable",
    "y_moments",
]

MAX_VARIABLE_EDGES = 24


def _as_fraction(p) -> Fraction:
    # Fraction(float) is the exact binary value of the float
    return p if isinstance(p, Fraction) else Fraction(p)


@dataclass
class EnumerationTask:
    """Enumerate ``variable_edges`` of ``window``; every other edge is fixed.

    ``fixed`` gives the state of the remaining edges (a Configuration on the
    same window, or a mapping edge -> state; unlisted edges are closed).
    ``observable`` maps a Configuration to a number or a boolean; a string
    selects one of the named observables.
    """

    window: Region
    p: float | Fraction = Fraction(1, 2)
    variable_edges: list | None = None
    fixed: Configuration | dict | None = None
    observable: Callable | str | None = None
    _variable: list = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= float(self.p) <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        all_edges = set(self.window.edges())
        if self.variable_edges is None:
            variable = sorted(all_edges, key=EdgeId.sort_key)
        else:
            variable = [_as_edge(e) for e in self.variable_edges]
            missing = [e for e in variable if e not in all_edges]
            if missing:
                raise ValueError(f"variable edges outside E(window): {missing[:3]}")
            if len(set(variable)) != len(variable):
                raise ValueError("variable edges contain duplicates")
        if len(variable) > MAX_VARIABLE_EDGES:
            raise ValueError(
                f"{len(variable)} variable edges exceed the enumeration cap of {MAX_VARIABLE_EDGES}"
            )
        self._variable = variable
        if isinstance(self.observable, str):
            self.observable = named_observable(self.observable)

    @property
    def n_variable(self) -> int:
        return len(self._variable)

    def base(self) -> Configuration:
        """Configuration with the fixed states and every variable edge closed."""
        if isinstance(self.fixed, Configuration):
            if self.fixed.window != self.window:
                raise ValueError("fixed configuration lives on another window")
            base = Configuration(self.window, *self.fixed.arrays(self.window.x0, self.window.y0, *self.window.shape))
        else:
            opened = [e for e, st in (self.fixed or {}).items() if st]
            base = Configuration.from_open_edges(self.window, opened)
        return base.with_states({e: False for e in self._variable})


def named_observable(name: str) -> Callable:
    """Observables addressable by name from configs and the CLI.

    ``origin-to-boundary``  O joined to the boundary of the window
    ``max-cluster``         largest cluster of the window
    ``boundary-touch``      sites joined to the window boundary
    ``hc:<variant>``        horizontal crossing of the (rectangular) window
    ``edge:<x>,<y>,<h|v>``  state of one edge
    """
    from . import clusters, topology

    if name == "origin-to-boundary":
        def obs(c):
            return bool(clusters.connected_to(c, c.window, c.window.boundary())[
                -c.window.x0, -c.window.y0])
    elif name == "max-cluster":
        def obs(c):
            return clusters.max_cluster_size(clusters.label_clusters(c))
    elif name == "boundary-touch":
        def obs(c):
            return clusters.boundary_touch_count(c, c.window)
    elif name.startswith("hc:"):
        variant = name[3:]

        def obs(c):
            return topology.has_horizontal_crossing(c, c.window, variant)
    elif name.startswith("edge:"):
        x, y, o = name[5:].split(",")
        edge = EdgeId(SiteCoord(int(x), int(y)), o)

        def obs(c):
            return c.state(edge)
    else:
        raise ValueError(f"unknown observable {name!r}")
    obs.__name__ = name
    return obs


class _Tally:
    """Marks a function whose values are counted per value, not summed."""

    def __init__(self, f):
        self.f = f


def _gray_sums(window, base_h, base_v, slots, fixed_bits, free, functions):
    """Per-open-edge-count sums of each function over one Gray-code block.

    ``slots`` holds (array, i, j) for every variable edge; the first
    ``len(fixed_bits)`` edges are pinned to ``fixed_bits`` and the next
    ``free`` edges are enumerated.
    """
    h, v = base_h.copy(), base_v.copy()
    arrays = {"h": h, "v": v}
    k = 0
    for (name, i, j), bit in zip(slots, fixed_bits):
        arrays[name][i, j] = bool(bit)
        k += bit
    offset = len(fixed_bits)
    n = len(slots)
    sums = [
        [Counter() for _ in range(n + 1)] if isinstance(f, _Tally) else [0] * (n + 1)
        for f in functions
    ]

    def visit(k):
        cfg = Configuration._trusted(window, h.copy(), v.copy())
        for f, s in zip(functions, sums):
            if isinstance(f, _Tally):
                s[k][f.f(cfg)] += 1
            else:
                s[k] += f(cfg)

    visit(k)
    for step in range(1, 1 << free):
        bit = (step & -step).bit_length() - 1
        name, i, j = slots[offset + bit]
        arr = arrays[name]
        arr[i, j] = not arr[i, j]
        k += 1 if arr[i, j] else -1
        visit(k)
    return sums


def _weights(p: Fraction, n: int):
    q = 1 - p
    return [p**k * q ** (n - k) for k in range(n + 1)]


def _enumerate(task: EnumerationTask, functions, prefix_bits=0, executor: Executor | None = None):
    base = task.base()
    window = task.window
    slots = []
    for e in task._variable:
        name = "h" if e.orientation == HORIZONTAL else "v"
        slots.append((name, e.site.x - window.x0, e.site.y - window.y0))
    n = len(slots)
    prefix_bits = max(0, min(prefix_bits, n))
    free = n - prefix_bits
    blocks = [tuple((b >> i) & 1 for i in range(prefix_bits)) for b in range(1 << prefix_bits)]
    args = (window, np.array(base.h), np.array(base.v), slots)
    if executor is None:
        parts = [_gray_sums(*args, bits, free, functions) for bits in blocks]
    else:
        futures = [executor.submit(_gray_sums, *args, bits, free, functions) for bits in blocks]
        parts = [fut.result() for fut in futures]
    weights = _weights(_as_fraction(task.p), n)
    results = []
    for idx, f in enumerate(functions):
        # exact merge of the per-prefix partial sums
        if isinstance(f, _Tally):
            law: dict = {}
            for part in parts:
                for k, counter in enumerate(part[idx]):
                    for val, count in counter.items():
                        law[val] = law.get(val, 0) + count * weights[k]
            results.append(dict(sorted(law.items())))
        else:
            totals = [sum(part[idx][k] for part in parts) for k in range(n + 1)]
            results.append(sum(Fraction(t) * w for t, w in zip(totals, weights)))
    return results


def _observable(task, event=None):
    f = event if event is not None else task.observable
    if f is None:
        raise ValueError("task has no observable")
    if isinstance(f, str):
        f = named_observable(f)
    return f


def enumerate_probability(task: EnumerationTask, event=None, **kwargs) -> Fraction:
    """Exact probability of an event (the task observable, read as a boolean)."""
    f = _observable(task, event)
    (prob,) = _enumerate(task, [lambda c: int(bool(f(c)))], **kwargs)
    return prob


def enumerate_expectation(task: EnumerationTask, observable=None, **kwargs) -> Fraction:
    f = _observable(task, observable)
    (mean,) = _enumerate(task, [f], **kwargs)
    return mean


def enumerate_distribution(task: EnumerationTask, observable=None, **kwargs) -> dict:
    """Exact law of an observable as ``{value: probability}``."""
    f = _observable(task, observable)
    (law,) = _enumerate(task, [_Tally(f)], **kwargs)
    return law


def enumerate_conditional_expectation(
    task: EnumerationTask, condition, observable=None, **kwargs
) -> Fraction:
    """E[observable | condition]; the condition must have positive probability."""
    f = _observable(task, observable)
    cond = named_observable(condition) if isinstance(condition, str) else condition

    def joint(c):
        return f(c) if cond(c) else 0

    prob, total = _enumerate(task, [lambda c: int(bool(cond(c))), joint], **kwargs)
    if prob == 0:
        raise ValueError("conditioning event has probability zero")
    return total / prob


def y_moments(p=Fraction(1, 2)) -> dict:
    """Exact law and moments of Y(1) through the inner-edge reduction.

    Y(1) only depends on the 12 edges of E(Lambda_1) and the 12 edges from
    the boundary of Lambda_1 to the boundary of Lambda_2. Given the inner
    edges, a cluster C of Lambda_1 reaches the outer boundary iff one of its
    r(C) outward edges is open, with probability 1 - (1-p)^r(C),
    independently across clusters. The inner edges are enumerated exactly.
    """
    from . import clusters

    p = _as_fraction(p)
    q = 1 - p
    inner = Region.box(1)
    outward = {}
    for s in inner.boundary().sites():
        outward[s] = (abs(s.x) == 1) + (abs(s.y) == 1)

    def signature(c):
        lab = clusters.label_clusters(c)
        groups: dict = {}
        for s in inner.sites():
            g = groups.setdefault(lab.label(s), [0, 0])
            g[0] += 1
            g[1] += outward.get(s, 0)
        return tuple(sorted(tuple(g) for g in groups.values()))

    law: dict = {}
    for sig, weight in enumerate_distribution(EnumerationTask(inner, p=p), signature).items():
        # law of a sum of independent |C| * Bernoulli(1 - q^r)
        dist = {0: Fraction(1)}
        for size, r in sig:
            hit = 1 - q**r
            new: dict = {}
            for val, pr in dist.items():
                if hit != 1:
                    new[val] = new.get(val, 0) + pr * (1 - hit)
                if hit != 0:
                    new[val + size] = new.get(val + size, 0) + pr * hit
            dist = new
        for val, pr in dist.items():
            law[val] = law.get(val, 0) + weight * pr
    law = {k: v for k, v in sorted(law.items()) if v != 0}
    mean = sum(k * v for k, v in law.items())
    second = sum(k * k * v for k, v in law.items())
    return {"law": law, "mean": mean, "second_moment": second}
