"""Crossings, dual crossings and circuit extraction in annuli.

Faces of the lattice are the sites of the dual lattice; a face is named by
its lower-left corner, so face ``(x, y)`` is the dual site
``(x + 1/2, y + 1/2)``. A dual edge is usable iff the primal edge it
crosses is closed.

Circuits surrounding the hole of an annulus are found by exploration rather
than enumeration: the outermost open circuit is the inner contour of the
faces reachable from outside, the innermost closed dual circuit is the outer
contour of the sites reachable from the hole.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .lattice import HORIZONTAL, VERTICAL, Configuration, EdgeId, Region, SiteCoord

__all__ = [
    "Circuit",
    "STANDARD",
    "crossing_from_arrays",
    "crossing_nodes",
    "PAPER_STRICT",
    "has_horizontal_crossing",
    "has_vertical_crossing",
    "has_dual_crossing",
    "has_open_circuit_in_annulus",
    "outermost_open_circuit",
    "innermost_closed_dual_circuit",
]

STANDARD = "standard"
PAPER_STRICT = "paper-strict"
_VARIANTS = (STANDARD, PAPER_STRICT)


@dataclass(frozen=True)
class Circuit:
    """Simple cycle of sites (or of faces, when ``dual`` is set)."""

    sites: tuple
    dual: bool = False

    def __post_init__(self):
        sites = tuple(SiteCoord(*s) for s in self.sites)
        object.__setattr__(self, "sites", sites)
        if len(sites) < 4:
            raise ValueError("a circuit needs at least 4 sites")
        if len(set(sites)) != len(sites):
            raise ValueError("circuit is not simple: repeated site")
        for a, b in zip(sites, sites[1:] + sites[:1]):
            if abs(a.x - b.x) + abs(a.y - b.y) != 1:
                raise ValueError(f"circuit is not closed: {a} and {b} are not adjacent")

    def __len__(self):
        return len(self.sites)

    @cached_property
    def edge_set(self) -> frozenset:
        """Primal edges on the circuit, or crossed by it for a dual circuit."""
        pairs = zip(self.sites, self.sites[1:] + self.sites[:1])
        if not self.dual:
            return frozenset(EdgeId.between(a, b) for a, b in pairs)
        return frozenset(_crossed_edge(a, b) for a, b in pairs)

    @cached_property
    def region(self) -> Region:
        if self.dual:
            raise AttributeError("a dual circuit has no primal sites")
        return Region.from_sites(self.sites)

    @cached_property
    def interior(self) -> Region:
        """Bounded component of Z^2 minus the circuit."""
        xs = [s.x for s in self.sites]
        ys = [s.y for s in self.sites]
        x0, y0 = min(xs) - 1, min(ys) - 1
        W, H = max(xs) - x0 + 2, max(ys) - y0 + 2
        hor = np.ones((W, H), bool)
        ver = np.ones((W, H), bool)
        nodes = np.ones((W, H), bool)
        if self.dual:
            for e in self.edge_set:
                i, j = e.site.x - x0, e.site.y - y0
                (hor if e.orientation == HORIZONTAL else ver)[i, j] = False
        else:
            for s in self.sites:
                nodes[s.x - x0, s.y - y0] = False
        frame = np.zeros((W, H), bool)
        frame[0, :] = frame[-1, :] = frame[:, 0] = frame[:, -1] = True
        outside = _kernels.flood(hor, ver, nodes, frame)
        return Region("sites", (), x0, y0, nodes & ~outside)

    def closure(self) -> Region:
        """Interior together with the circuit's own sites."""
        return self.interior | self.region

    def to_text(self) -> str:
        """Cyclic site list, one ``x y`` pair per line (dual sites at half-integers)."""
        if self.dual:
            return "".join(f"{s.x + 0.5:g} {s.y + 0.5:g}\n" for s in self.sites)
        return "".join(f"{s.x} {s.y}\n" for s in self.sites)

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        pairs = [line.split() for line in text.splitlines() if line.strip()]
        dual = any("." in a or "." in b for a, b in pairs)
        if dual:
            sites = [(int(float(a) - 0.5), int(float(b) - 0.5)) for a, b in pairs]
        else:
            sites = [(int(a), int(b)) for a, b in pairs]
        return cls(tuple(sites), dual=dual)


def _crossed_edge(f, g) -> EdgeId:
    """Primal edge separating the adjacent faces ``f`` and ``g``."""
    (fx, fy), (gx, gy) = f, g
    if fy == gy:
        return EdgeId(SiteCoord(max(fx, gx), fy), VERTICAL)
    return EdgeId(SiteCoord(fx, max(fy, gy)), HORIZONTAL)


def _require_inside(region: Region, config: Configuration, what="region"):
    if not region.issubset(config.window):
        raise ValueError(f"{what} is not contained in the configuration window")


def _rect_bounds(box: Region):
    if not box or not box.mask.all():
        raise ValueError(f"crossings are defined for rectangles only, got {box!r}")
    return box.bbox


def _open_in(config: Configuration, region: Region):
    return config.open_within(region)


def crossing_nodes(W: int, H: int, variant: str = STANDARD) -> np.ndarray:
    """Sites a left-right crossing of a W x H grid may visit."""
    if variant not in _VARIANTS:
        raise ValueError(f"unknown crossing variant {variant!r}")
    nodes = np.ones((W, H), bool)
    if variant == PAPER_STRICT:
        # intermediate vertices must be interior: drop the top and bottom rows
        # except where they belong to the start/end columns
        nodes[1:-1, 0] = False
        nodes[1:-1, -1] = False
    return nodes


def crossing_from_arrays(h, v, variant: str = STANDARD, vertical: bool = False) -> bool:
    """Crossing test on raw open-edge arrays of a full rectangle (fast path)."""
    if vertical:
        h, v = v.T, h.T
    W, H = h.shape
    seeds = np.zeros((W, H), bool)
    seeds[0, :] = True
    reached = _kernels.flood(h, v, crossing_nodes(W, H, variant), seeds)
    return bool(reached[-1, :].any())


def _primal_crossing(config, box, variant, vertical):
    if variant not in _VARIANTS:
        raise ValueError(f"unknown crossing variant {variant!r}")
    _rect_bounds(box)
    _require_inside(box, config, "box")
    h, v = _open_in(config, box)
    return crossing_from_arrays(h, v, variant, vertical)


def has_horizontal_crossing(config: Configuration, box: Region, variant: str = STANDARD) -> bool:
    """Open path from the left side to the right side of a rectangle.

    ``paper-strict`` additionally requires every vertex other than the two
    endpoints to lie in the interior of the box.
    """
    return _primal_crossing(config, box, variant, vertical=False)


def has_vertical_crossing(config: Configuration, box: Region, variant: str = STANDARD) -> bool:
    """Open path from the bottom side to the top side of a rectangle."""
    return _primal_crossing(config, box, variant, vertical=True)


def has_dual_crossing(config: Configuration, box: Region, direction: str) -> bool:
    """Closed dual path crossing the dual rectangle of ``box``.

    For ``direction="vertical"`` the dual rectangle consists of the faces
    ``[x0, x1-1] x [y0-1, y1]`` and the crossing joins its bottom row to its
    top row through primal edges of E(box). Exactly one of this and a
    (standard) horizontal open crossing of ``box`` occurs.
    """
    if direction not in ("vertical", "horizontal"):
        raise ValueError(f"direction must be 'vertical' or 'horizontal', got {direction!r}")
    _rect_bounds(box)
    _require_inside(box, config, "box")
    h, v = _open_in(config, box)
    if direction == "horizontal":
        h, v = v.T, h.T
    W, H = h.shape
    # faces a in [0, W-2] (lower-left column a), rows b in [0, H] (row b-1)
    # vertical dual edge (a, b)-(a, b+1) crosses horizontal primal h[a, b]
    # horizontal dual edge (a, b)-(a+1, b) crosses vertical primal v[a+1, b-1]
    FW, FH = W - 1, H + 1
    if FW < 1:
        return False
    dver = np.zeros((FW, FH), bool)
    dver[:, :H] = ~h[:FW, :]
    dhor = np.zeros((FW, FH), bool)
    dhor[: FW - 1, 1:H] = ~v[1:FW, : H - 1]
    seeds = np.zeros((FW, FH), bool)
    seeds[:, 0] = True
    reached = _kernels.flood(dhor, dver, np.ones((FW, FH), bool), seeds)
    return bool(reached[:, -1].any())


def _dual_grids(block_h, block_v):
    """Dual adjacency for the faces around a primal grid of shape (W, H).

    Face index ``(a, b)`` has lower-left corner at primal index
    ``(a-1, b-1)``; a dual edge is usable iff the crossed primal edge is
    not blocking.
    """
    W, H = block_h.shape
    dhor = np.ones((W + 1, H + 1), bool)
    dver = np.ones((W + 1, H + 1), bool)
    # (a, b)-(a+1, b) crosses vertical primal at index (a, b-1)
    dhor[:W, 1:H + 1] &= ~block_v
    # (a, b)-(a, b+1) crosses horizontal primal at index (a-1, b)
    dver[1:W + 1, :H] &= ~block_h
    dhor[W, :] = False
    dver[:, H] = False
    return dhor, dver


def _require_annulus(annulus: Region):
    if annulus.kind != "annulus":
        raise ValueError(f"expected an annulus region, got kind {annulus.kind!r}")
    if annulus.outer - annulus.inner < 1:
        raise ValueError("degenerate annulus")


def _outer_faces(config: Configuration, annulus: Region):
    """Faces reachable from outside by dual paths avoiding open edges of E(A)."""
    _require_annulus(annulus)
    _require_inside(annulus, config, "annulus")
    R, r = annulus.outer, annulus.inner
    block_h, block_v = _open_in(config, annulus)
    dhor, dver = _dual_grids(block_h, block_v)
    F = 2 * R + 2
    seeds = np.zeros((F, F), bool)
    seeds[0, :] = seeds[-1, :] = seeds[:, 0] = seeds[:, -1] = True
    reached = _kernels.flood(dhor, dver, np.ones((F, F), bool), seeds)
    inner = np.zeros((F, F), bool)
    inner[R - r:R + r + 2, R - r:R + r + 2] = True
    return reached, inner


def has_open_circuit_in_annulus(config: Configuration, annulus: Region) -> bool:
    """Open circuit inside the annulus surrounding its hole.

    Decided through duality: such a circuit exists iff no closed dual path
    joins the faces around the hole to the faces outside the annulus.
    """
    reached, inner = _outer_faces(config, annulus)
    return not bool((reached & inner).any())


def _trace(adjacency: dict, start) -> list:
    cycle = [start]
    prev, cur = None, start
    # start is lowest-leftmost: its neighbours are right and up; going right
    # first walks counter-clockwise
    first = max(adjacency[start])
    while True:
        nbrs = adjacency[cur]
        if len(nbrs) != 2:
            raise RuntimeError(f"contour is not a simple cycle at {cur}")
        nxt = first if prev is None else (nbrs[0] if nbrs[1] == prev else nbrs[1])
        if nxt == start:
            break
        cycle.append(nxt)
        prev, cur = cur, nxt
    if len(cycle) != len(adjacency):
        raise RuntimeError("contour splits into several cycles")
    return cycle


def _add(adjacency, a, b):
    adjacency.setdefault(a, []).append(b)
    adjacency.setdefault(b, []).append(a)


def outermost_open_circuit(config: Configuration, annulus: Region) -> Circuit | None:
    """The open circuit in the annulus whose interior contains all others.

    Returns ``None`` when the annulus holds no open circuit around its hole.
    """
    reached, inner = _outer_faces(config, annulus)
    if (reached & inner).any():
        return None
    F = reached.shape[0]
    everything = np.ones((F, F), bool)
    K = _kernels.flood(everything, everything, ~reached, inner)
    # primal edge h[i, j] separates faces (i+1, j) and (i+1, j+1);
    # v[i, j] separates faces (i, j+1) and (i+1, j+1)
    bh = K[1:, :-1] != K[1:, 1:]
    bv = K[:-1, 1:] != K[1:, 1:]
    x0, y0 = annulus.x0, annulus.y0
    adjacency: dict = {}
    for i, j in zip(*np.nonzero(bh[:-1, :])):
        _add(adjacency, (x0 + i, y0 + j), (x0 + i + 1, y0 + j))
    for i, j in zip(*np.nonzero(bv[:, :-1])):
        _add(adjacency, (x0 + i, y0 + j), (x0 + i, y0 + j + 1))
    adjacency = {(int(a), int(b)): [(int(c), int(d)) for c, d in n] for (a, b), n in adjacency.items()}
    start = min(adjacency, key=lambda s: (s[1], s[0]))
    cycle = _trace(adjacency, start)
    return Circuit(tuple(cycle))


def innermost_closed_dual_circuit(config: Configuration, annulus: Region) -> Circuit | None:
    """The closed dual circuit in the annulus whose interior lies in all others.

    A dual circuit lies in ``Lambda_R minus Lambda_r`` when all its dual
    sites are at sup-distance between ``r + 1/2`` and ``R - 1/2`` from the
    centre, so it crosses primal edges whose two adjacent faces both lie in
    that band. The primal sites reachable from the hole without crossing a
    closed band edge are enclosed; their outer contour is the answer.
    """
    _require_annulus(annulus)
    hull = Region.box(annulus.outer, annulus.center)
    _require_inside(hull, config, "annulus together with its hole")
    R, r = annulus.outer, annulus.inner
    S = 2 * R + 3
    gx0, gy0 = annulus.x0 - 1, annulus.y0 - 1
    h, v = config.arrays(gx0, gy0, S, S)
    # face (i, j) has lower-left primal index (i, j); centre level below
    c = np.abs(np.arange(S - 1) - (R + 1) + 0.5)
    level = np.maximum(c[:, None], c[None, :])
    band = (level >= r + 0.5) & (level <= R - 0.5)
    band_h = np.zeros((S, S), bool)  # h[i, j] between faces (i, j-1) and (i, j)
    band_h[: S - 1, 1: S - 1] = band[:, :-1] & band[:, 1:]
    band_v = np.zeros((S, S), bool)  # v[i, j] between faces (i-1, j) and (i, j)
    band_v[1: S - 1, : S - 1] = band[:-1, :] & band[1:, :]
    usable_h = ~(band_h & ~h)
    usable_v = ~(band_v & ~v)
    usable_h[-1, :] = False
    usable_v[:, -1] = False
    nodes = np.ones((S, S), bool)
    hole = np.zeros((S, S), bool)
    hole[R + 1 - r:R + 2 + r, R + 1 - r:R + 2 + r] = True
    P = _kernels.flood(usable_h, usable_v, nodes, hole)
    if P[0, :].any() or P[-1, :].any() or P[:, 0].any() or P[:, -1].any():
        return None
    frame = np.zeros((S, S), bool)
    frame[0, :] = frame[-1, :] = frame[:, 0] = frame[:, -1] = True
    Kstar = _kernels.flood(nodes, nodes, ~P, frame)
    adjacency: dict = {}
    # horizontal primal edge (i, j)-(i+1, j) separates faces (i, j-1), (i, j)
    for i, j in zip(*np.nonzero((P[:-1, :] & Kstar[1:, :]) | (Kstar[:-1, :] & P[1:, :]))):
        _add(adjacency, (int(gx0 + i), int(gy0 + j - 1)), (int(gx0 + i), int(gy0 + j)))
    # vertical primal edge (i, j)-(i, j+1) separates faces (i-1, j), (i, j)
    for i, j in zip(*np.nonzero((P[:, :-1] & Kstar[:, 1:]) | (Kstar[:, :-1] & P[:, 1:]))):
        _add(adjacency, (int(gx0 + i - 1), int(gy0 + j)), (int(gx0 + i), int(gy0 + j)))
    start = min(adjacency, key=lambda s: (s[1], s[0]))
    return Circuit(tuple(_trace(adjacency, start)), dual=True)
