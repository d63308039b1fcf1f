import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critperc import (
    ConstantsConfig,
    InfeasibleParameters,
    PartitionSpec,
    Region,
    block_regions,
    build_partition,
    choose_parameters,
    parse_pi_model,
)
from critperc.geometry import PowerLawPi, TablePi, construction_inequalities, verify_choice


def test_figure_partition():
    spec = PartitionSpec(3, 13, 2)
    part = build_partition(spec, 40)
    assert 40 - 3 * 13 == 1 <= spec.t
    assert len(part.blocks) == 9
    assert part.big == Region.box(39)


def test_corridor_h00():
    blk = block_regions(PartitionSpec(3, 13, 2), 0, 0)
    assert blk.H == Region.rect(9, 17, 0, 2)
    assert blk.V == Region.rect(0, 2, 9, 17)


def test_a_iii_at_t_equal_s_over_3():
    blk = block_regions(PartitionSpec(1, 9, 3), 0, 0)
    assert blk.A_III == Region.annulus(3, 0)
    assert len(blk.A_III) == 48


def test_spec_validation():
    with pytest.raises(ValueError):
        PartitionSpec(2, 9, 1)
    with pytest.raises(ValueError):
        PartitionSpec(3, 9, 4)
    with pytest.raises(ValueError):
        PartitionSpec(3, 9, 0)
    with pytest.raises(ValueError):
        build_partition(PartitionSpec(3, 13, 2), 38)


@given(m=st.sampled_from([1, 3, 5]), s=st.integers(3, 20), data=st.data())
def test_region_identities(m, s, data):
    t = data.draw(st.integers(1, s // 3))
    spec = PartitionSpec(m, s, t)
    base = block_regions(spec, 0, 0)
    for i, j in spec.indices():
        blk = block_regions(spec, i, j)
        assert not (blk.A_I & blk.A_II) and not (blk.A_II & blk.A_III) and not (blk.A_I & blk.A_III)
        assert (blk.A_I | blk.A_II | blk.A_III) == blk.A_prime
        assert blk.A_prime == Region.annulus(s, s - 3 * t, spec.offset(i, j))
        dx, dy = spec.offset(i, j)
        for name in blk._fields:
            assert getattr(blk, name) == getattr(base, name).translate(dx, dy)


def test_corridors_straddle_neighbours():
    spec = PartitionSpec(3, 9, 2)
    for i, j in spec.indices():
        blk = block_regions(spec, i, j)
        right = block_regions(spec, i + 1, j)
        up = block_regions(spec, i, j + 1)
        assert blk.H & blk.A_II and blk.H & right.A_II
        assert blk.V & blk.A_II and blk.V & up.A_II


def test_boxes_tile_big_box():
    spec = PartitionSpec(3, 5, 1)
    part = build_partition(spec, 15)
    union = Region.empty()
    for blk in part.blocks.values():
        union = union | blk.B
    assert union == Region.box(15)


def test_q_region():
    spec = PartitionSpec(3, 9, 2)
    part = build_partition(spec, 28)
    Q = part.Q
    assert (Region.box(28) - Region.box(27)).issubset(Q)
    for blk in part.blocks.values():
        assert blk.A_prime.issubset(Q)
        # interior sites of B minus A' stay out of Q
        core = Region.box(9 - 3 * 2 - 1, blk.B.center)
        assert not (core & Q)


def test_constants_validation():
    with pytest.raises(ValueError):
        ConstantsConfig(1.0, 1.0)
    with pytest.raises(ValueError):
        ConstantsConfig(2.0, 1.0)
    with pytest.raises(ValueError):
        ConstantsConfig(0.1, 1.0, C10=0)


def check_choice(choice, constants, model):
    for n in (choice.N, 2 * choice.N, 4 * choice.N):
        checks = construction_inequalities(choice.x, choice.eps, [n], constants, model)
        assert all(bool(v[0]) for v in checks.values()), (n, checks)
        # direct substitution, independent of the vectorised form
        s = math.floor(choice.x * n + 1e-12)
        t = math.floor(choice.eps * s + 1e-12)
        pi = lambda k: float(model(k))  # noqa: E731
        inv = round(1 / choice.x)
        third = (constants.b - constants.a) / 3
        assert constants.C17 * s * s * pi(s) * inv**2 >= constants.a * n * n * pi(n)
        assert constants.C18 * s * s * pi(s) <= third * n * n * pi(n)
        assert max(4 * constants.C10, constants.C15) * inv**2 * t * s * pi(t) <= third * n * n * pi(n)
        assert t >= 1 and n - inv * s <= t


def test_choose_parameters_square_root_profile():
    constants = ConstantsConfig(0.1, 10.0)
    model = parse_pi_model("power:0.5")
    choice = choose_parameters(constants, model)
    assert choice.inv_x % 2 == 1 and choice.eps < 1 / 12
    check_choice(choice, constants, model)
    assert verify_choice(choice, constants, model, range(1, 4097)) == []
    spec = choice.partition_spec(choice.N)
    assert spec.m == choice.inv_x


def test_choose_parameters_constant_profile():
    constants = ConstantsConfig(0.1, 10.0)
    model = parse_pi_model("const")
    choice = choose_parameters(constants, model)
    check_choice(choice, constants, model)
    sqrt_choice = choose_parameters(constants, parse_pi_model("power:0.5"))
    assert choice.eps >= sqrt_choice.eps


def test_choose_parameters_reports_infeasibility():
    with pytest.raises(InfeasibleParameters) as info:
        choose_parameters(ConstantsConfig(0.1, 10.0), parse_pi_model("power:0.9"))
    assert info.value.report["violated"]
    assert "violates" in str(info.value)


def test_pi_models():
    pw = PowerLawPi(0.5)
    assert float(pw(0)) == 1.0
    assert float(pw(4)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        PowerLawPi(1.0)
    table = TablePi({1: 0.9, 4: 0.6, 16: 0.4})
    assert float(table(4)) == pytest.approx(0.6)
    assert float(table(64)) < 0.4
    assert np.all(np.diff(table(np.arange(1, 200))) <= 1e-12)
    with pytest.raises(ValueError):
        TablePi({1: 0.5, 2: 0.6})
    assert isinstance(parse_pi_model("table:1=0.9,8=0.5"), TablePi)
    with pytest.raises(ValueError):
        parse_pi_model("cubic:3")
