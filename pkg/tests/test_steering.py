import itertools
from fractions import Fraction

import numpy as np
import pytest

from critperc import RngSpec
from critperc.estimators import (
    SteeringHypothesisError,
    SteeringInstance,
    all_steps_proper,
    demo_instance,
    random_instance,
    steering_oracle,
    steering_simulate,
    sum_law,
    window_probability,
)
from critperc.estimators.steering import MAX_PRODUCT_SUPPORT


def brute_window(dists, alpha, beta):
    """Loop over every outcome tuple."""
    total = Fraction(0)
    for combo in itertools.product(*[list(d.items()) for d in dists]):
        s = sum(v for v, _ in combo)
        if alpha < s < beta:
            p = Fraction(1)
            for _, q in combo:
                p *= q
            total += p
    return total


def test_negative_atom_counterexample():
    half = Fraction(1, 2)
    d = {Fraction(7, 5): half, Fraction(-100): half}
    # without the sign hypothesis the bound (1/2)^3 would be claimed ...
    assert Fraction(1) / 3 < Fraction(7, 5) < Fraction(3, 2)
    assert Fraction(-100) <= Fraction(1, 2)
    # ... but the sum never lands in (1, 4)
    assert window_probability([d, d, d], 1, 4) == 0
    with pytest.raises(SteeringHypothesisError) as info:
        SteeringInstance(1, 4, (d, d, d), half, half)
    assert info.value.clause == "X_i >= 0"


def test_demo_instance():
    inst = demo_instance()
    assert steering_oracle(inst) == Fraction(3, 4)
    assert inst.bound == Fraction(1, 4)
    sim = steering_simulate(inst, 40000, RngSpec(1))
    assert sim.z_score(Fraction(3, 4)) < 4


def test_random_instances_respect_bound():
    gen = np.random.default_rng(7)
    for _ in range(100):
        inst = random_instance(gen)
        exact = steering_oracle(inst)
        assert exact >= inst.bound
        assert exact == brute_window(inst.distributions, inst.alpha, inst.beta)


def test_proper_walks_land_in_window():
    gen = np.random.default_rng(3)
    for _ in range(30):
        inst = random_instance(gen, max_k=4, max_support=4)
        proper = Fraction(0)
        for combo in itertools.product(*[list(d.items()) for d in inst.distributions]):
            xs = [v for v, _ in combo]
            if all_steps_proper(inst, xs):
                assert inst.alpha < sum(xs) < inst.beta
                p = Fraction(1)
                for _, q in combo:
                    p *= q
                proper += p
        assert inst.bound <= proper <= steering_oracle(inst)


def test_simulation_matches_oracle():
    inst = random_instance(np.random.default_rng(11), max_k=3)
    sim = steering_simulate(inst, 30000, RngSpec(2))
    assert sim.z_score(steering_oracle(inst)) < 4
    assert sim == steering_simulate(inst, 30000, RngSpec(2))


@pytest.mark.parametrize(
    "args, clause",
    [
        ((2, 1, [{0: 1}]), "alpha < beta"),
        ((3, 4, [{Fraction(1, 10): 1}]), "alpha/k < (beta-alpha)/2"),
        ((1, 4, [{1: Fraction(1, 2)}]), "probabilities form a distribution"),
        ((1, 4, [{0: 1}, {1: 1}]), "eta1 > 0"),
        ((1, 4, [{Fraction(4, 5): 1}, {Fraction(4, 5): 1}]), "eta2 > 0"),
        ((1, 4, []), "k >= 1"),
    ],
)
def test_hypothesis_clauses(args, clause):
    with pytest.raises(SteeringHypothesisError) as info:
        SteeringInstance(*args)
    assert info.value.clause == clause


def test_given_levels_are_checked():
    half = Fraction(1, 2)
    d = {Fraction(2, 5): half, Fraction(7, 10): half}
    with pytest.raises(SteeringHypothesisError) as info:
        SteeringInstance(1, 3, (d, d), Fraction(3, 4), half)
    assert info.value.clause.startswith("P(X_i in")


def test_sum_law_and_support_cap():
    law = sum_law([{0: Fraction(1, 2), 1: Fraction(1, 2)}] * 3)
    assert law == {0: Fraction(1, 8), 1: Fraction(3, 8), 2: Fraction(3, 8), 3: Fraction(1, 8)}
    # 100 atoms in (1/8, 1/3): mid-size and small at once
    d = {Fraction(1, 5) + Fraction(k, 1000): Fraction(1, 100) for k in range(100)}
    inst = SteeringInstance(Fraction(1, 2), 40, [d] * 4)
    assert inst.support_product > MAX_PRODUCT_SUPPORT
    with pytest.raises(ValueError):
        steering_oracle(inst)
