import random

import pytest

from esem import bpv
from esem import groupmath as gm
from esem.errors import ParameterError
from esem.groupmath import OpCounter
from esem.sim_harness import oracle_enumerate_subsets

from reference_group import oracle_mod_q


@pytest.fixture(scope="module")
def toy_table():
    return bpv.bpv_offline(3, 8, random.Random(11))


def test_offline_table_invariant(toy_table):
    assert toy_table.n == 8
    assert toy_table.v == 3
    for r, R in toy_table.pairs:
        assert not r.is_zero()
        assert R == gm.mul_basepoint(r)


def test_offline_parameter_validation(rng):
    with pytest.raises(ParameterError):
        bpv.bpv_offline(8, 8, rng)
    with pytest.raises(ParameterError):
        bpv.bpv_offline(9, 8, rng)
    with pytest.raises(ParameterError):
        bpv.bpv_offline(2, 8, rng)


def test_online_output_is_consistent_pair(toy_table, rng):
    for _ in range(30):
        r, R = bpv.bpv_online(toy_table, rng)
        assert R == gm.mul_basepoint(r)


def test_online_outputs_are_subset_sums(toy_table, rng):
    oracle = oracle_enumerate_subsets([r for r, _ in toy_table.pairs], toy_table.v)
    assert len(oracle) == 56
    sums = {s.value for _, s in oracle}
    for _ in range(100):
        r, _ = bpv.bpv_online(toy_table, rng)
        assert r.value in sums


def test_oracle_sums_agree_with_gmp(toy_table):
    scalars = [r for r, _ in toy_table.pairs]
    for subset, total in oracle_enumerate_subsets(scalars, 3):
        recomputed = oracle_mod_q(sum(scalars[i].value for i in subset))
        assert recomputed == total.value


def test_combine_subset_matches_manual(toy_table):
    subset = (1, 4, 6)
    r, R = bpv.combine_subset(toy_table, subset)
    manual = sum(toy_table.pairs[i][0].value for i in subset) % gm.q
    assert r.value == manual
    assert R == gm.mul_basepoint(r)


def test_sample_subset_shape(rng):
    for _ in range(200):
        subset = bpv.sample_subset(8, 3, rng)
        assert len(subset) == 3
        assert len(set(subset)) == 3
        assert all(0 <= i < 8 for i in subset)


def test_sample_subset_covers_all_subsets(rng):
    seen = set()
    for _ in range(3000):
        seen.add(frozenset(bpv.sample_subset(8, 3, rng)))
    assert len(seen) == 56


def test_online_op_counts(toy_table, rng):
    ops = OpCounter()
    bpv.bpv_online(toy_table, rng, ops)
    assert ops.scalar_adds == toy_table.v - 1
    assert ops.point_adds == toy_table.v - 1
    assert ops.fixed_base_mults == 0
