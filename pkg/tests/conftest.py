"""Shared fixtures and brute-force reference implementations.

The references below use plain Python graph searches over explicit edge
lists; they share no code with the compiled kernels they are compared to.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import pytest
from hypothesis import settings

from critperc import Configuration, EdgeId, Region, RngSpec, SiteCoord, sample_configuration

# lattice work per example is uneven; wall-clock deadlines only add flakiness
settings.register_profile("critperc", deadline=None, max_examples=40)
settings.load_profile("critperc")


def open_graph(config: Configuration, region: Region | None = None) -> dict:
    """Adjacency lists of the open edges with both ends in ``region``."""
    region = config.window if region is None else region
    sites = region.site_set()
    adj = {s: [] for s in sites}
    for e in config.open_edges():
        u, w = e.endpoints()
        if u in sites and w in sites:
            adj[u].append(w)
            adj[w].append(u)
    return adj


def bfs(adj: dict, sources) -> set:
    seen = set(sources)
    todo = deque(seen)
    while todo:
        u = todo.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def components(adj: dict) -> list[set]:
    left = set(adj)
    out = []
    while left:
        comp = bfs(adj, [next(iter(left))])
        out.append(comp)
        left -= comp
    return out


def rect_sides(box: Region):
    x0, x1, y0, y1 = box.bbox
    sites = box.sites()
    return (
        [s for s in sites if s.x == x0],
        [s for s in sites if s.x == x1],
        [s for s in sites if s.y == y0],
        [s for s in sites if s.y == y1],
    )


def dual_crossing_bfs(config: Configuration, box: Region) -> bool:
    """Closed dual path from below the box to above it, by BFS over faces.

    Faces are named by their lower-left corner. The faces ``(x, y)`` with
    ``x0 <= x < x1`` and ``y0 - 1 <= y <= y1`` form the dual rectangle; a
    step between vertically adjacent faces crosses a horizontal edge, a step
    between horizontally adjacent ones a vertical edge.
    """
    x0, x1, y0, y1 = box.bbox
    closed = {e for e in box.edges() if not config.state(e)}
    faces = {(x, y) for x in range(x0, x1) for y in range(y0 - 1, y1 + 1)}

    def nbrs(f):
        x, y = f
        for g, e in (
            ((x, y + 1), ((x, y + 1), "h")),
            ((x, y - 1), ((x, y), "h")),
            ((x + 1, y), ((x + 1, y), "v")),
            ((x - 1, y), ((x, y), "v")),
        ):
            if g not in faces:
                continue
            edge = EdgeId(SiteCoord(*e[0]), e[1])
            if edge in closed:
                yield g

    start = [(x, y0 - 1) for x in range(x0, x1)]
    seen = set(start)
    todo = deque(start)
    while todo:
        f = todo.popleft()
        if f[1] == y1:
            return True
        for g in nbrs(f):
            if g not in seen:
                seen.add(g)
                todo.append(g)
    return False


def all_configurations(window: Region):
    """Every configuration of E(window), as (Configuration, open-edge set)."""
    edges = window.edges()
    for bits in range(1 << len(edges)):
        opened = [e for k, e in enumerate(edges) if bits >> k & 1]
        yield Configuration.from_open_edges(window, opened)


@pytest.fixture
def rng():
    return RngSpec(2024, 7)


@pytest.fixture
def random_configs():
    def make(window: Region, count: int, p: float = 0.5, seed: int = 11):
        base = RngSpec(seed)
        return [sample_configuration(window, p, base.substream(i)) for i in range(count)]

    return make


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)


# -- acceptance verdicts -----------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def record_verdict(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
