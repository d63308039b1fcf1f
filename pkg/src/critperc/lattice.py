"""Finite windows of the square lattice, bond configurations and the RNG spec."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from . import _kernels
from ._rng import as_u64, stream_key, substream

__all__ = [
    "SiteCoord",
    "EdgeId",
    "Region",
    "Configuration",
    "RngSpec",
    "build_region",
    "sample_configuration",
    "complete_outside",
    "transform_configuration",
]

HORIZONTAL = "h"
VERTICAL = "v"


class SiteCoord(NamedTuple):
    x: int
    y: int

    def __str__(self):
        return f"{self.x} {self.y}"

    @classmethod
    def parse(cls, text: str) -> "SiteCoord":
        x, y = text.split()
        return cls(int(x), int(y))


class EdgeId(NamedTuple):
    """Edge of Z^2 given by its lower-left endpoint and orientation."""

    site: SiteCoord
    orientation: str

    def endpoints(self) -> tuple[SiteCoord, SiteCoord]:
        x, y = self.site
        if self.orientation == HORIZONTAL:
            return SiteCoord(x, y), SiteCoord(x + 1, y)
        return SiteCoord(x, y), SiteCoord(x, y + 1)

    @classmethod
    def between(cls, u, w) -> "EdgeId":
        (ux, uy), (wx, wy) = u, w
        if uy == wy and abs(ux - wx) == 1:
            return cls(SiteCoord(min(ux, wx), uy), HORIZONTAL)
        if ux == wx and abs(uy - wy) == 1:
            return cls(SiteCoord(ux, min(uy, wy)), VERTICAL)
        raise ValueError(f"sites {u} and {w} are not adjacent")

    def sort_key(self):
        return (self.site.y, self.site.x, self.orientation)


def _edge_masks(mask):
    hvalid = np.zeros_like(mask)
    vvalid = np.zeros_like(mask)
    if mask.size:
        hvalid[:-1, :] = mask[:-1, :] & mask[1:, :]
        vvalid[:, :-1] = mask[:, :-1] & mask[:, 1:]
    return hvalid, vvalid


def _aligned(mask, x0, y0, bx0, by0, W, H):
    """Re-express ``mask`` (origin ``x0, y0``) on the box ``(bx0, by0, W, H)``."""
    out = np.zeros((W, H), bool)
    mw, mh = mask.shape
    lo_x, hi_x = max(x0, bx0), min(x0 + mw, bx0 + W)
    lo_y, hi_y = max(y0, by0), min(y0 + mh, by0 + H)
    if lo_x < hi_x and lo_y < hi_y:
        out[lo_x - bx0:hi_x - bx0, lo_y - by0:hi_y - by0] = mask[
            lo_x - x0:hi_x - x0, lo_y - y0:hi_y - y0
        ]
    return out


class Region:
    """Finite set of sites of Z^2 stored as a boolean mask over a bounding box.

    ``kind`` and ``params`` record how the region was built; annuli keep
    their centre and radii because circuit detection needs them.
    """

    __slots__ = ("kind", "params", "x0", "y0", "mask", "_edge_cache")

    def __init__(self, kind, params, x0, y0, mask):
        self.kind = kind
        self.params = params
        self.x0 = int(x0)
        self.y0 = int(y0)
        mask = np.ascontiguousarray(mask, dtype=bool)
        mask.setflags(write=False)
        self.mask = mask
        self._edge_cache = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def rect(cls, x0, x1, y0, y1) -> "Region":
        """All sites of ``[x0, x1] x [y0, y1]``."""
        if x1 < x0 or y1 < y0:
            raise ValueError(f"empty rectangle [{x0},{x1}]x[{y0},{y1}]")
        return cls("rect", (x0, x1, y0, y1), x0, y0, np.ones((x1 - x0 + 1, y1 - y0 + 1), bool))

    @classmethod
    def box(cls, n, center=(0, 0)) -> "Region":
        """Lambda_n = [-n, n]^2, optionally translated."""
        if n < 0:
            raise ValueError(f"box radius must be >= 0, got {n}")
        cx, cy = center
        r = cls.rect(cx - n, cx + n, cy - n, cy + n)
        r.kind, r.params = "box", (n, cx, cy)
        return r

    @classmethod
    def rectangle(cls, k, n) -> "Region":
        """Lambda_{k,n} = [-k, k] x [-n, n]."""
        if k < 0 or n < 0:
            raise ValueError(f"rectangle half-widths must be >= 0, got {(k, n)}")
        r = cls.rect(-k, k, -n, n)
        r.kind, r.params = "rectangle", (k, n)
        return r

    @classmethod
    def annulus(cls, outer, inner, center=(0, 0)) -> "Region":
        """Lambda_outer minus Lambda_inner, both centred at ``center``."""
        if inner < 0 or outer <= inner:
            raise ValueError(f"annulus needs 0 <= inner < outer, got outer={outer}, inner={inner}")
        cx, cy = center
        idx = np.arange(-outer, outer + 1)
        norm = np.maximum(np.abs(idx)[:, None], np.abs(idx)[None, :])
        return cls("annulus", (outer, inner, cx, cy), cx - outer, cy - outer, norm > inner)

    @classmethod
    def from_sites(cls, sites: Iterable) -> "Region":
        pts = np.array([tuple(s) for s in sites], dtype=np.int64).reshape(-1, 2)
        if len(pts) == 0:
            return cls.empty()
        x0, y0 = pts.min(axis=0)
        x1, y1 = pts.max(axis=0)
        mask = np.zeros((x1 - x0 + 1, y1 - y0 + 1), bool)
        mask[pts[:, 0] - x0, pts[:, 1] - y0] = True
        return cls("sites", (), x0, y0, mask)

    @classmethod
    def empty(cls) -> "Region":
        return cls("empty", (), 0, 0, np.zeros((0, 0), bool))

    # -- geometry -----------------------------------------------------------
    @property
    def shape(self):
        return self.mask.shape

    @property
    def bbox(self):
        W, H = self.mask.shape
        return self.x0, self.x0 + W - 1, self.y0, self.y0 + H - 1

    @property
    def center(self):
        if self.kind == "box":
            return self.params[1], self.params[2]
        if self.kind == "annulus":
            return self.params[2], self.params[3]
        raise AttributeError(f"region of kind {self.kind!r} has no centre")

    @property
    def outer(self):
        if self.kind != "annulus":
            raise AttributeError("not an annulus")
        return self.params[0]

    @property
    def inner(self):
        if self.kind != "annulus":
            raise AttributeError("not an annulus")
        return self.params[1]

    def hole(self) -> "Region":
        """Inner box of an annulus."""
        return Region.box(self.inner, self.center)

    def mask_in(self, x0, y0, W, H):
        return _aligned(self.mask, self.x0, self.y0, x0, y0, W, H)

    def __len__(self):
        return int(self.mask.sum())

    def __bool__(self):
        return bool(self.mask.any())

    def __contains__(self, site):
        x, y = site
        i, j = x - self.x0, y - self.y0
        W, H = self.mask.shape
        return 0 <= i < W and 0 <= j < H and bool(self.mask[i, j])

    def __iter__(self):
        return iter(self.sites())

    def sites(self) -> list[SiteCoord]:
        ii, jj = np.nonzero(self.mask)
        order = np.lexsort((ii, jj))
        return [SiteCoord(int(self.x0 + ii[k]), int(self.y0 + jj[k])) for k in order]

    def site_set(self) -> frozenset:
        return frozenset(self.sites())

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.site_set() == other.site_set()

    def __hash__(self):
        return hash(self.site_set())

    def __repr__(self):
        return f"Region({self.kind}, {self.params}, sites={len(self)})"

    def _union_box(self, other):
        if not self:
            return other.x0, other.y0, *other.mask.shape
        if not other:
            return self.x0, self.y0, *self.mask.shape
        ax0, ax1, ay0, ay1 = self.bbox
        bx0, bx1, by0, by1 = other.bbox
        x0, y0 = min(ax0, bx0), min(ay0, by0)
        return x0, y0, max(ax1, bx1) - x0 + 1, max(ay1, by1) - y0 + 1

    def __or__(self, other: "Region") -> "Region":
        x0, y0, W, H = self._union_box(other)
        mask = self.mask_in(x0, y0, W, H) | other.mask_in(x0, y0, W, H)
        return Region("union", (self, other), x0, y0, mask)

    def __sub__(self, other: "Region") -> "Region":
        W, H = self.mask.shape
        mask = self.mask & ~other.mask_in(self.x0, self.y0, W, H)
        return Region("difference", (self, other), self.x0, self.y0, mask)

    def __and__(self, other: "Region") -> "Region":
        W, H = self.mask.shape
        mask = self.mask & other.mask_in(self.x0, self.y0, W, H)
        return Region("intersection", (self, other), self.x0, self.y0, mask)

    def issubset(self, other: "Region") -> bool:
        W, H = self.mask.shape
        return not (self.mask & ~other.mask_in(self.x0, self.y0, W, H)).any()

    def translate(self, dx, dy) -> "Region":
        params = self.params
        if self.kind == "box":
            params = (params[0], params[1] + dx, params[2] + dy)
        elif self.kind == "annulus":
            params = (params[0], params[1], params[2] + dx, params[3] + dy)
        elif self.kind == "rect":
            params = (params[0] + dx, params[1] + dx, params[2] + dy, params[3] + dy)
        kind = self.kind if self.kind in ("box", "annulus", "rect", "sites", "empty") else "translate"
        if kind == "translate":
            params = (self, dx, dy)
        return Region(kind, params, self.x0 + dx, self.y0 + dy, self.mask)

    def boundary_mask(self):
        m = self.mask
        padded = np.pad(m, 1)
        inner = padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
        return m & ~inner

    def boundary(self) -> "Region":
        """Sites of the region with a lattice neighbour outside it."""
        return Region("sites", (), self.x0, self.y0, self.boundary_mask())

    def interior(self) -> "Region":
        return Region("sites", (), self.x0, self.y0, self.mask & ~self.boundary_mask())

    def edge_masks(self):
        """(horizontal, vertical) masks of E(R), edges with both ends in R."""
        if self._edge_cache is None:
            hv, vv = _edge_masks(self.mask)
            hv.setflags(write=False)
            vv.setflags(write=False)
            self._edge_cache = (hv, vv)
        return self._edge_cache

    def n_edges(self) -> int:
        hv, vv = self.edge_masks()
        return int(hv.sum() + vv.sum())

    def edges(self) -> list[EdgeId]:
        hv, vv = self.edge_masks()
        out = []
        for arr, orient in ((hv, HORIZONTAL), (vv, VERTICAL)):
            for i, j in zip(*np.nonzero(arr)):
                out.append(EdgeId(SiteCoord(int(self.x0 + i), int(self.y0 + j)), orient))
        out.sort(key=EdgeId.sort_key)
        return out


def build_region(kind: str, **params) -> Region:
    """Build a region by name: box, rectangle, rect, annulus, sites."""
    if kind == "box":
        return Region.box(params["n"], params.get("center", (0, 0)))
    if kind == "rectangle":
        return Region.rectangle(params["k"], params["n"])
    if kind == "rect":
        return Region.rect(params["x0"], params["x1"], params["y0"], params["y1"])
    if kind == "annulus":
        return Region.annulus(params["outer"], params["inner"], params.get("center", (0, 0)))
    if kind == "sites":
        return Region.from_sites(params["sites"])
    raise ValueError(f"unknown region kind {kind!r}")


@dataclass(frozen=True)
class RngSpec:
    """Identifies one reproducible configuration stream."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.stream < 1 << 64:
            raise ValueError("stream must be a 64-bit unsigned integer")

    @property
    def key(self):
        return np.uint64(stream_key(as_u64(self.seed), as_u64(self.stream)))

    def substream(self, index: int) -> "RngSpec":
        return RngSpec(self.seed, int(substream(as_u64(self.stream), as_u64(index))))

    def child(self, tag: str) -> "RngSpec":
        """Independent stream derived from a text label."""
        digest = hashlib.blake2b(tag.encode(), digest_size=8).digest()
        return RngSpec(self.seed, (self.stream * 0x100000001B3 ^ int.from_bytes(digest, "little")) % (1 << 64))


class Configuration:
    """Open/closed state of every edge of E(window).

    States live in two boolean grids over the window's bounding box
    (``h[i, j]``: edge from ``(x0+i, y0+j)`` to the right, ``v[i, j]``: edge
    upwards). Entries that are not edges of the window are always False.
    A dual edge is usable exactly when the primal edge it crosses is closed.
    """

    __slots__ = ("window", "h", "v")

    def __init__(self, window: Region, h, v):
        hv, vv = window.edge_masks()
        h = np.asarray(h, dtype=bool)
        v = np.asarray(v, dtype=bool)
        if h.shape != window.shape or v.shape != window.shape:
            raise ValueError("state arrays must match the window bounding box")
        h = h & hv
        v = v & vv
        h.setflags(write=False)
        v.setflags(write=False)
        self.window = window
        self.h = h
        self.v = v

    @classmethod
    def _trusted(cls, window: Region, h, v) -> "Configuration":
        # caller guarantees h, v are fresh arrays already masked to E(window)
        self = object.__new__(cls)
        h.setflags(write=False)
        v.setflags(write=False)
        self.window, self.h, self.v = window, h, v
        return self

    @classmethod
    def constant(cls, window: Region, state: bool) -> "Configuration":
        hv, vv = window.edge_masks()
        if not state:
            hv, vv = np.zeros_like(hv), np.zeros_like(vv)
        return cls(window, hv, vv)

    @classmethod
    def from_open_edges(cls, window: Region, edges: Iterable) -> "Configuration":
        h = np.zeros(window.shape, bool)
        v = np.zeros(window.shape, bool)
        hv, vv = window.edge_masks()
        for e in edges:
            e = _as_edge(e)
            i, j = e.site.x - window.x0, e.site.y - window.y0
            target, valid = (h, hv) if e.orientation == HORIZONTAL else (v, vv)
            if not (0 <= i < target.shape[0] and 0 <= j < target.shape[1] and valid[i, j]):
                raise KeyError(f"edge {e} is not in E(window)")
            target[i, j] = True
        return cls(window, h, v)

    def _index(self, edge):
        e = _as_edge(edge)
        i, j = e.site.x - self.window.x0, e.site.y - self.window.y0
        hv, vv = self.window.edge_masks()
        valid = hv if e.orientation == HORIZONTAL else vv
        W, H = self.window.shape
        if not (0 <= i < W and 0 <= j < H and valid[i, j]):
            raise KeyError(f"edge {e} is not in E(window)")
        return e.orientation, i, j

    def state(self, edge) -> bool:
        orient, i, j = self._index(edge)
        return bool((self.h if orient == HORIZONTAL else self.v)[i, j])

    def dual_state(self, edge) -> bool:
        """True when the dual edge crossing ``edge`` is usable (primal closed)."""
        return not self.state(edge)

    def with_states(self, updates: dict) -> "Configuration":
        h, v = self.h.copy(), self.v.copy()
        for edge, state in updates.items():
            orient, i, j = self._index(edge)
            (h if orient == HORIZONTAL else v)[i, j] = bool(state)
        return Configuration(self.window, h, v)

    def edges(self) -> list[EdgeId]:
        return self.window.edges()

    @property
    def states(self) -> np.ndarray:
        """Dense 0/1 vector over E(window) in snapshot order."""
        return np.array([self.state(e) for e in self.edges()], dtype=np.uint8)

    def n_open(self) -> int:
        return int(self.h.sum() + self.v.sum())

    def n_edges(self) -> int:
        return self.window.n_edges()

    def arrays(self, x0, y0, W, H):
        """Edge states re-expressed over another bounding box."""
        wx0, wy0 = self.window.x0, self.window.y0
        return (
            _aligned(self.h, wx0, wy0, x0, y0, W, H),
            _aligned(self.v, wx0, wy0, x0, y0, W, H),
        )

    def open_within(self, region: Region):
        """Open edges of E(region), over the region's bounding box."""
        W, H = region.shape
        h, v = self.arrays(region.x0, region.y0, W, H)
        hv, vv = region.edge_masks()
        return h & hv, v & vv

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.window == other.window
            and sorted(self.open_edges()) == sorted(other.open_edges())
        )

    def open_edges(self) -> list[EdgeId]:
        out = []
        for arr, orient in ((self.h, HORIZONTAL), (self.v, VERTICAL)):
            for i, j in zip(*np.nonzero(arr)):
                out.append(EdgeId(SiteCoord(int(self.window.x0 + i), int(self.window.y0 + j)), orient))
        return out

    def to_snapshot(self) -> str:
        """One line per edge: ``x y h|v state``, sorted by (y, x, orientation)."""
        lines = [
            f"{e.site.x} {e.site.y} {e.orientation} {int(self.state(e))}" for e in self.edges()
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_snapshot(cls, text: str, window: Region | None = None) -> "Configuration":
        parsed = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            x, y, orient, state = line.split()
            if orient not in (HORIZONTAL, VERTICAL) or state not in ("0", "1"):
                raise ValueError(f"malformed snapshot line {line!r}")
            parsed.append((EdgeId(SiteCoord(int(x), int(y)), orient), state == "1"))
        if window is None:
            window = Region.from_sites(s for e, _ in parsed for s in e.endpoints())
        listed = {e for e, _ in parsed}
        if listed != set(window.edges()):
            raise ValueError("snapshot edges do not match E(window)")
        return cls.from_open_edges(window, [e for e, st in parsed if st])

    def __repr__(self):
        return f"Configuration({self.window!r}, open={self.n_open()}/{self.n_edges()})"


def _as_edge(e) -> EdgeId:
    if isinstance(e, EdgeId):
        return e
    site, orient = e
    return EdgeId(SiteCoord(*site), orient)


def sample_configuration(window: Region, p: float, rng: RngSpec) -> Configuration:
    """Each edge of E(window) open independently with probability ``p``.

    The state of an edge depends only on ``(rng, edge)``, never on the window,
    so overlapping windows sampled with the same spec agree on shared edges.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    hv, vv = window.edge_masks()
    h, v = _kernels.fill_states(rng.key, float(p), window.x0, window.y0, hv, vv)
    return Configuration(window, h, v)


def complete_outside(config: Configuration, inner: Region, state="open", window: Region | None = None):
    """Keep the states on E(inner) and set every other edge to ``state``.

    ``window`` may enlarge the result beyond ``config.window``; the extra
    edges are set to ``state`` as well.
    """
    if state not in ("open", "closed", True, False):
        raise ValueError(f"state must be 'open' or 'closed', got {state!r}")
    fill = state in ("open", True)
    if not inner.issubset(config.window):
        raise ValueError("inner region is not contained in the configuration window")
    target = config.window if window is None else window
    if not config.window.issubset(target):
        raise ValueError("completion window must contain the configuration window")
    bx0, by0 = target.x0, target.y0
    W, H = target.shape
    hv, vv = target.edge_masks()
    ih, iv = Region.edge_masks(inner)
    ih = _aligned(ih, inner.x0, inner.y0, bx0, by0, W, H)
    iv = _aligned(iv, inner.x0, inner.y0, bx0, by0, W, H)
    ch, cv = config.arrays(bx0, by0, W, H)
    h = np.where(ih, ch, fill & hv)
    v = np.where(iv, cv, fill & vv)
    return Configuration(target, h, v)


def _map_site(site, rotation, reflect):
    x, y = site
    if reflect:
        x = -x
    for _ in range(rotation % 4):
        x, y = -y, x
    return SiteCoord(x, y)


def transform_configuration(config: Configuration, rotation: int = 0, reflect: bool = False):
    """Image of a configuration under a symmetry of the square.

    ``reflect`` mirrors ``x -> -x`` first, then the lattice is rotated by
    ``rotation`` quarter turns counter-clockwise about the origin.
    """
    window = Region.from_sites(_map_site(s, rotation, reflect) for s in config.window.sites())
    opened = []
    for e in config.open_edges():
        u, w = e.endpoints()
        opened.append(EdgeId.between(_map_site(u, rotation, reflect), _map_site(w, rotation, reflect)))
    return Configuration.from_open_edges(window, opened)
