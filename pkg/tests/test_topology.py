import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bfs, dual_crossing_bfs, open_graph, rect_sides
from critperc import (
    Circuit,
    Configuration,
    EdgeId,
    Region,
    RngSpec,
    SiteCoord,
    has_dual_crossing,
    has_horizontal_crossing,
    has_open_circuit_in_annulus,
    has_vertical_crossing,
    innermost_closed_dual_circuit,
    outermost_open_circuit,
    sample_configuration,
    transform_configuration,
)
from critperc.topology import crossing_from_arrays


def ring(r, center=(0, 0)):
    cx, cy = center
    pts = [(x, -r) for x in range(-r, r)] + [(r, y) for y in range(-r, r)]
    pts += [(x, r) for x in range(r, -r, -1)] + [(-r, y) for y in range(r, -r, -1)]
    return Circuit(tuple((cx + x, cy + y) for x, y in pts))


def crossing_bfs(config, box, vertical=False):
    left, right, bottom, top = rect_sides(box)
    src, dst = (bottom, top) if vertical else (left, right)
    return bool(bfs(open_graph(config, box), src) & set(dst))


def winds_around(edges, center) -> bool:
    """Some closed walk on ``edges`` has nonzero winding around ``center``.

    Voltage +1 on each upward crossing of the ray ``y = cy + 1/2, x > cx``;
    the graph carries a winding cycle iff the voltage is not a potential
    difference on some component.
    """
    cx, cy = center
    adj: dict = {}
    for e in edges:
        u, w = e.endpoints()
        volt = 1 if (e.orientation == "v" and e.site.y == cy and e.site.x > cx) else 0
        adj.setdefault(u, []).append((w, volt))
        adj.setdefault(w, []).append((u, -volt))
    pot: dict = {}
    for root in adj:
        if root in pot:
            continue
        pot[root] = 0
        todo = deque([root])
        while todo:
            u = todo.popleft()
            for w, volt in adj[u]:
                if w not in pot:
                    pot[w] = pot[u] + volt
                    todo.append(w)
                elif pot[w] != pot[u] + volt:
                    return True
    return False


def open_circuit_oracle(config, annulus):
    inside = set(annulus.edges())
    return winds_around([e for e in config.open_edges() if e in inside], annulus.center)


def closed_dual_circuit_oracle(config, annulus):
    """Winding closed dual cycle through faces of the annulus band."""
    R, r = annulus.outer, annulus.inner
    cx, cy = annulus.center

    def in_band(fx, fy):
        level = max(abs(fx + 0.5 - cx), abs(fy + 0.5 - cy))
        return r + 0.5 <= level <= R - 0.5

    adj: dict = {}
    for e in Region.box(R, annulus.center).edges():
        if config.state(e):
            continue
        x, y = e.site
        f, g = ((x, y - 1), (x, y)) if e.orientation == "h" else ((x - 1, y), (x, y))
        if not (in_band(*f) and in_band(*g)):
            continue
        # ray y = cy, x > cx - 1/2 (through the centre site's right half)
        volt = 1 if (e.orientation == "h" and y == cy and x >= cx) else 0
        adj.setdefault(f, []).append((g, volt))
        adj.setdefault(g, []).append((f, -volt))
    pot: dict = {}
    for root in adj:
        if root in pot:
            continue
        pot[root] = 0
        todo = deque([root])
        while todo:
            u = todo.popleft()
            for w, volt in adj[u]:
                if w not in pot:
                    pot[w] = pot[u] + volt
                    todo.append(w)
                elif pot[w] != pot[u] + volt:
                    return True
    return False


SMALL_SHAPES = [(W, H) for W in range(2, 7) for H in range(2, 7) if (W - 1) * H + W * (H - 1) <= 16]


def test_small_shapes_cover_sixteen_edges():
    assert max((W - 1) * H + W * (H - 1) for W, H in SMALL_SHAPES) == 16
    assert (2, 6) in SMALL_SHAPES and (3, 3) in SMALL_SHAPES


@pytest.mark.parametrize("W,H", SMALL_SHAPES)
def test_duality_exhaustive(W, H):
    box = Region.rect(0, W - 1, 0, H - 1)
    hv, vv = box.edge_masks()
    slots = [("h", i, j) for i, j in zip(*np.nonzero(hv))] + [("v", i, j) for i, j in zip(*np.nonzero(vv))]
    for bits in range(1 << len(slots)):
        h = np.zeros((W, H), bool)
        v = np.zeros((W, H), bool)
        for k, (o, i, j) in enumerate(slots):
            if bits >> k & 1:
                (h if o == "h" else v)[i, j] = True
        cfg = Configuration(box, h, v)
        assert has_horizontal_crossing(cfg, box) != has_dual_crossing(cfg, box, "vertical")
        assert has_vertical_crossing(cfg, box) != has_dual_crossing(cfg, box, "horizontal")


def test_crossings_match_bfs(random_configs):
    box = Region.rect(-3, 4, -2, 3)
    for cfg in random_configs(Region.box(6), 200):
        assert has_horizontal_crossing(cfg, box) == crossing_bfs(cfg, box)
        assert has_vertical_crossing(cfg, box) == crossing_bfs(cfg, box, vertical=True)
        assert has_dual_crossing(cfg, box, "vertical") == dual_crossing_bfs(cfg, box)


def test_dual_crossing_rejects_direction():
    cfg = Configuration.constant(Region.box(1), True)
    with pytest.raises(ValueError):
        has_dual_crossing(cfg, Region.box(1), "diagonal")


def test_crossing_rejects_unknown_variant():
    cfg = Configuration.constant(Region.box(1), True)
    with pytest.raises(ValueError):
        has_horizontal_crossing(cfg, Region.box(1), "loose")


def test_strict_variant_excludes_side_rows():
    box = Region.rect(0, 3, 0, 2)
    along_bottom = Configuration.from_open_edges(box, [((x, 0), "h") for x in range(3)])
    assert has_horizontal_crossing(along_bottom, box)
    assert not has_horizontal_crossing(along_bottom, box, "paper-strict")
    middle = Configuration.from_open_edges(box, [((x, 1), "h") for x in range(3)])
    assert has_horizontal_crossing(middle, box, "paper-strict")


def test_strict_variant_implies_standard(random_configs):
    box = Region.rect(0, 5, 0, 4)
    for cfg in random_configs(box, 300, p=0.6):
        if has_horizontal_crossing(cfg, box, "paper-strict"):
            assert has_horizontal_crossing(cfg, box)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**40), rotation=st.integers(0, 3), reflect=st.booleans())
def test_crossings_under_symmetry(seed, rotation, reflect):
    box = Region.box(4)
    cfg = sample_configuration(box, 0.5, RngSpec(seed))
    img = transform_configuration(cfg, rotation, reflect)
    hc, vc = has_horizontal_crossing(cfg, box), has_vertical_crossing(cfg, box)
    if rotation % 2:
        hc, vc = vc, hc
    assert has_horizontal_crossing(img, box) == hc
    assert has_vertical_crossing(img, box) == vc
    ann = Region.annulus(4, 1)
    assert has_open_circuit_in_annulus(img, ann) == has_open_circuit_in_annulus(cfg, ann)


def test_crossing_from_arrays_fast_path():
    h = np.zeros((3, 2), bool)
    v = np.zeros((3, 2), bool)
    h[:2, 0] = True
    assert crossing_from_arrays(h, v)
    assert not crossing_from_arrays(h, v, vertical=True)


# -- circuits ---------------------------------------------------------------


def test_circuit_validation():
    with pytest.raises(ValueError):
        Circuit(((0, 0), (1, 0), (1, 1)))
    with pytest.raises(ValueError):
        Circuit(((0, 0), (1, 0), (2, 0), (1, 1)))
    gamma = ring(2)
    assert len(gamma) == 16
    assert gamma.interior == Region.box(1)
    assert gamma.closure() == Region.box(2)
    assert Circuit.from_text(gamma.to_text()) == gamma


def test_dual_circuit_text_round_trip():
    dual = Circuit(((0, 0), (1, 0), (1, 1), (0, 1)), dual=True)
    assert "0.5 0.5" in dual.to_text()
    assert Circuit.from_text(dual.to_text()) == dual
    # the dual square around the site (1, 1)
    assert dual.interior == Region.from_sites([(1, 1)])


def test_outermost_open_circuit_all_open():
    ann = Region.annulus(3, 1)
    cfg = Configuration.constant(Region.box(3), True)
    gamma = outermost_open_circuit(cfg, ann)
    assert gamma == ring(3) or set(gamma.sites) == set(ring(3).sites)
    assert has_open_circuit_in_annulus(cfg, ann)


def test_outermost_picks_the_outer_of_two():
    window = Region.box(4)
    cfg = Configuration.from_open_edges(window, list(ring(2).edge_set | ring(4).edge_set))
    ann = Region.annulus(4, 1)
    assert set(outermost_open_circuit(cfg, ann).sites) == set(ring(4).sites)
    only_inner = Configuration.from_open_edges(window, list(ring(2).edge_set))
    assert set(outermost_open_circuit(only_inner, ann).sites) == set(ring(2).sites)
    assert outermost_open_circuit(Configuration.constant(window, False), ann) is None


def test_innermost_closed_dual_circuit():
    window = Region.box(3)
    ann = Region.annulus(3, 1)
    gamma = innermost_closed_dual_circuit(Configuration.constant(window, False), ann)
    assert gamma is not None and gamma.dual
    # innermost band level is r + 1/2: the dual ring around Lambda_1
    assert gamma.interior == Region.box(1)
    assert innermost_closed_dual_circuit(Configuration.constant(window, True), ann) is None


def test_circuit_in_hole_does_not_count():
    window = Region.box(4)
    cfg = Configuration.from_open_edges(window, list(ring(1).edge_set))
    assert not has_open_circuit_in_annulus(cfg, Region.annulus(4, 1))
    assert has_open_circuit_in_annulus(cfg, Region.annulus(4, 0))


def test_rejects_non_annulus():
    cfg = Configuration.constant(Region.box(2), True)
    with pytest.raises(ValueError):
        has_open_circuit_in_annulus(cfg, Region.box(2))


@pytest.mark.parametrize("outer,inner,center", [(3, 1, (0, 0)), (4, 2, (1, -1)), (5, 1, (0, 0)), (3, 0, (0, 0))])
def test_circuits_match_winding_oracle(outer, inner, center, random_configs):
    ann = Region.annulus(outer, inner, center)
    window = Region.box(outer + 1, center)
    for p in (0.5, 0.7, 0.85):
        for cfg in random_configs(window, 150, p=p, seed=outer * 100 + inner):
            has = has_open_circuit_in_annulus(cfg, ann)
            assert has == open_circuit_oracle(cfg, ann)
            gamma = outermost_open_circuit(cfg, ann)
            assert (gamma is not None) == has
            if gamma is not None:
                assert gamma.region.issubset(ann)
                assert all(cfg.state(e) for e in gamma.edge_set)
                assert ann.hole().issubset(gamma.interior)
        for cfg in random_configs(window, 150, p=1 - p, seed=outer * 100 + inner + 1):
            beta = innermost_closed_dual_circuit(cfg, ann)
            assert (beta is not None) == closed_dual_circuit_oracle(cfg, ann)
            if beta is not None:
                assert not any(cfg.state(e) for e in beta.edge_set)
                assert ann.hole().issubset(beta.interior)


def test_outermost_contains_every_open_circuit(random_configs):
    """Closing one edge of the outermost circuit leaves only circuits inside it."""
    ann = Region.annulus(4, 1)
    for cfg in random_configs(Region.box(4), 300, p=0.75):
        gamma = outermost_open_circuit(cfg, ann)
        if gamma is None:
            continue
        for e in itertools.islice(sorted(gamma.edge_set), 4):
            other = outermost_open_circuit(cfg.with_states({e: False}), ann)
            if other is not None:
                assert other.interior.issubset(gamma.interior)


def test_innermost_inside_every_closed_dual_circuit(random_configs):
    ann = Region.annulus(4, 1)
    for cfg in random_configs(Region.box(4), 300, p=0.25):
        beta = innermost_closed_dual_circuit(cfg, ann)
        if beta is None:
            continue
        for e in itertools.islice(sorted(beta.edge_set), 4):
            other = innermost_closed_dual_circuit(cfg.with_states({e: True}), ann)
            if other is not None:
                assert beta.interior.issubset(other.interior)


def test_open_circuit_blocks_dual_circuit(random_configs):
    """An open circuit and a closed dual circuit around the same hole are nested."""
    ann = Region.annulus(5, 1)
    for cfg in random_configs(Region.box(5), 300, p=0.5):
        gamma = outermost_open_circuit(cfg, ann)
        beta = innermost_closed_dual_circuit(cfg, ann)
        if gamma is not None and beta is not None:
            assert beta.interior.issubset(gamma.interior) or gamma.closure().issubset(beta.interior)


def test_edge_ids_of_dual_circuit():
    dual = Circuit(((0, 0), (1, 0), (1, 1), (0, 1)), dual=True)
    assert dual.edge_set == frozenset({
        EdgeId(SiteCoord(1, 0), "v"), EdgeId(SiteCoord(1, 1), "h"),
        EdgeId(SiteCoord(1, 1), "v"), EdgeId(SiteCoord(0, 1), "h"),
    })
