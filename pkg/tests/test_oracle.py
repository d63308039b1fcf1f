import itertools
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from conftest import all_configurations, bfs, open_graph
from critperc import (
    Configuration,
    EdgeId,
    EnumerationTask,
    PartitionSpec,
    Region,
    SiteCoord,
    block_regions,
    boundary_touch_count,
    enumerate_conditional_expectation,
    enumerate_distribution,
    enumerate_expectation,
    enumerate_probability,
    event_d,
    event_g,
    event_o,
    label_clusters,
    max_cluster_size,
)
from critperc.oracle import MAX_VARIABLE_EDGES, y_moments

HALF = Fraction(1, 2)
ORIGIN_EDGES = [((0, 0), "h"), ((-1, 0), "h"), ((0, 0), "v"), ((0, -1), "v")]


def brute(window, f, p=HALF):
    """Plain loop over every configuration, no Gray code."""
    n = window.n_edges()
    total = Fraction(0)
    for cfg in all_configurations(window):
        k = cfg.n_open()
        total += Fraction(f(cfg)) * p**k * (1 - p) ** (n - k)
    return total


def test_single_edge():
    e = EdgeId(SiteCoord(0, 0), "h")
    task = EnumerationTask(Region.box(1), HALF, [e], observable="edge:0,0,h")
    assert enumerate_probability(task) == HALF


def test_pi_one_full_and_reduced():
    full = enumerate_probability(EnumerationTask(Region.box(1), HALF, observable="origin-to-boundary"))
    assert full == Fraction(15, 16)
    # only the four edges at O matter: the boundary of Lambda_1 is all but O
    reduced = enumerate_probability(EnumerationTask(Region.box(1), HALF, ORIGIN_EDGES, observable="origin-to-boundary"))
    assert reduced == Fraction(15, 16)


def test_hc_one_one_strict_variant():
    task = EnumerationTask(Region.rect(0, 1, 0, 1), HALF, observable="hc:paper-strict")
    assert task.n_variable == 4
    assert enumerate_probability(task) == Fraction(3, 4)


def test_max_cluster_law_lambda_1():
    law = enumerate_distribution(EnumerationTask(Region.box(1), HALF, observable="max-cluster"))
    assert sum(law.values()) == 1
    assert law[1] == Fraction(1, 4096)
    assert law[9] > 0 and set(law) <= set(range(1, 10))
    assert all(prob.denominator <= 4096 for prob in law.values())


def test_ctilde_lambda_1():
    mean = enumerate_expectation(EnumerationTask(Region.box(1), HALF, observable="boundary-touch"))
    assert mean == Fraction(143, 16)


def test_gray_code_matches_brute_force():
    window = Region.rect(0, 2, 0, 1)
    for name in ("max-cluster", "boundary-touch", "hc:standard", "origin-to-boundary"):
        task = EnumerationTask(window, Fraction(1, 3), observable=name)
        f = task.observable
        assert enumerate_expectation(task) == brute(window, f, Fraction(1, 3))


def test_prefix_split_is_exact():
    task = EnumerationTask(Region.box(1), HALF, observable="max-cluster")
    serial = enumerate_distribution(task)
    with ThreadPoolExecutor(4) as pool:
        split = enumerate_distribution(task, prefix_bits=3, executor=pool)
    assert split == serial
    assert enumerate_distribution(task, prefix_bits=2) == serial


def test_probabilities_of_a_partition_sum_to_one():
    task = EnumerationTask(Region.box(1), Fraction(2, 7))
    probs = [enumerate_probability(task, lambda c, k=k: c.n_open() % 3 == k) for k in range(3)]
    assert sum(probs) == 1


def test_fixed_edges():
    window = Region.box(1)
    fixed = Configuration.constant(window, True)
    task = EnumerationTask(window, HALF, ORIGIN_EDGES, fixed=fixed, observable="origin-to-boundary")
    assert enumerate_probability(task) == Fraction(15, 16)
    closed = EnumerationTask(window, HALF, ORIGIN_EDGES[:2], fixed={e: True for e in ORIGIN_EDGES[2:]},
                             observable="origin-to-boundary")
    assert enumerate_probability(closed) == 1


def test_cap_and_validation():
    with pytest.raises(ValueError):
        EnumerationTask(Region.box(2))  # 40 edges
    assert MAX_VARIABLE_EDGES == 24
    with pytest.raises(ValueError):
        EnumerationTask(Region.box(1), HALF, [((5, 5), "h")])
    with pytest.raises(ValueError):
        EnumerationTask(Region.box(1), HALF, [((0, 0), "h"), ((0, 0), "h")])
    with pytest.raises(ValueError):
        EnumerationTask(Region.box(1), Fraction(3, 2))
    with pytest.raises(ValueError):
        EnumerationTask(Region.box(1), HALF, observable="nonsense")


def test_conditional_expectation():
    task = EnumerationTask(Region.box(1), HALF, observable="boundary-touch")
    assert enumerate_conditional_expectation(task, lambda c: True) == Fraction(143, 16)
    origin_open = lambda c: all(c.state(e) for e in ORIGIN_EDGES)  # noqa: E731
    value = enumerate_conditional_expectation(task, origin_open)
    assert value >= 5
    assert value == brute(Region.box(1), lambda c: boundary_touch_count(c, c.window) * origin_open(c)) * 16
    with pytest.raises(ValueError):
        enumerate_conditional_expectation(task, lambda c: False)


def test_y_one_moments():
    res = y_moments()
    assert res["mean"] == Fraction(136315353, 16777216)
    assert res["second_moment"] == Fraction(1133426457, 16777216)
    assert sum(res["law"].values()) == 1


def test_y_moments_at_p_one():
    res = y_moments(Fraction(1))
    assert res["law"] == {9: 1}


def test_event_g_exact():
    spec = PartitionSpec(1, 3, 1)
    blk = block_regions(spec, 0, 0)
    task = EnumerationTask(Region.box(1), HALF)
    p_inner = enumerate_probability(task, lambda c: event_g(c, spec))
    assert p_inner == Fraction(1, 16)
    # A_III = Lambda_1 minus O: the dual circuit must cross the four edges at O
    assert blk.A_III == Region.annulus(1, 0)


def event_o_exact(p=HALF):
    """P(O_00) at m = 1, s = 3, t = 1 by the chain rule.

    A_II = Lambda_2 minus Lambda_1 is a single ring, so O needs its 16 edges
    open; given that, each of the four corridors needs an open link from the
    ring to the boundary of Lambda_3 inside the corridor, using its own six
    edges. The ring and the four corridor edge sets are disjoint.
    """
    spec = PartitionSpec(1, 3, 1)
    window = Region.box(3)
    ring = Region.annulus(2, 1).edges()
    p_ring = enumerate_probability(
        EnumerationTask(window, p, ring, fixed=Configuration.constant(window, True)),
        lambda c: event_o(c, spec, window).holds,
    )
    blk = block_regions(spec, 0, 0)
    ring_set = set(ring)
    total = p_ring
    corridors = [blk.H, blk.V, block_regions(spec, -1, 0).H, block_regions(spec, 0, -1).V]
    for corridor in corridors:
        mine = [e for e in (corridor & window).edges() if e not in ring_set]
        assert len(mine) == 6
        q = enumerate_probability(
            EnumerationTask(window, p, mine, fixed=Configuration.constant(window, True)),
            lambda c: event_o(c, spec, window).holds,
        )
        total *= q
    return p_ring, total


def test_event_o_exact_chain_rule():
    p_ring, total = event_o_exact()
    assert p_ring == Fraction(1, 65536)
    assert total == Fraction(81, 16777216)


def test_d_one_interval():
    task = EnumerationTask(Region.box(1), HALF)
    prob = enumerate_probability(task, lambda c: event_d(label_clusters(c), 1, 1.5, 4.5, 1.0))
    direct = enumerate_probability(
        task, lambda c: any(2 <= s <= 4 for s in label_clusters(c).sizes.values())
    )
    assert prob == direct
    assert 0 < prob < 1


def test_max_cluster_brute_force_small():
    window = Region.rect(0, 2, 0, 1)
    law = enumerate_distribution(EnumerationTask(window, HALF, observable="max-cluster"))
    counts: dict = {}
    for cfg in all_configurations(window):
        m = max_cluster_size(label_clusters(cfg))
        counts[m] = counts.get(m, 0) + 1
    assert law == {m: Fraction(c, 2 ** window.n_edges()) for m, c in sorted(counts.items())}


def test_dyadic_denominators():
    task = EnumerationTask(Region.rect(0, 2, 0, 2), HALF, observable="hc:standard")
    value = enumerate_probability(task)
    assert (2**task.n_variable) % value.denominator == 0
    assert value == brute(Region.rect(0, 2, 0, 2), task.observable)


def test_unlisted_edges_are_fixed_closed():
    window = Region.box(1)
    edges = list(itertools.islice(window.edges(), 10))
    task = EnumerationTask(window, HALF, edges, observable="max-cluster")
    assert enumerate_expectation(task) == brute(
        window, lambda c: max_cluster_size(label_clusters(c)) if all(not c.state(e) for e in window.edges()[10:]) else 0
    ) * 4


def test_ctilde_rectangle_reduced_instance():
    window = Region.rectangle(1, 2)
    inner = {SiteCoord(0, y) for y in (-1, 0, 1)}
    touching = sorted({e for e in window.edges() if any(s in inner for s in e.endpoints())})
    # boundary sites always count; only the edges at the three interior sites matter
    assert len(touching) == 10
    reduced = enumerate_expectation(EnumerationTask(window, HALF, touching, observable="boundary-touch"))
    boundary = [s for s in window.sites() if s not in inner]
    total = Fraction(0)
    for bits in range(1 << 10):
        cfg = Configuration.from_open_edges(window, [e for k, e in enumerate(touching) if bits >> k & 1])
        total += len(bfs(open_graph(cfg), boundary))
    assert reduced == total / 1024
    assert 12 < reduced < 15
