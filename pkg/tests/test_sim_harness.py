import math
import random

import pytest

from esem import groupmath as gm
from esem import sim_harness as sim
from esem.errors import ParameterError
from esem.groupmath import Scalar
from esem.snodbpv import SnodParams, snod_receiver_aggregate

from conftest import TOY_PARAMS
from reference_group import oracle_mod_q


@pytest.fixture()
def toy_instance(rng):
    return sim.make_instance(TOY_PARAMS, rng)


# ── enumeration oracle ───────────────────────────────────────────────────


def test_enumerate_counts_and_sums(rng):
    scalars = [gm.random_scalar(rng) for _ in range(8)]
    oracle = sim.oracle_enumerate_subsets(scalars, 3)
    assert len(oracle) == math.comb(8, 3) == 56
    for subset, total in oracle:
        assert total.value == oracle_mod_q(sum(scalars[i].value for i in subset))


def test_enumerate_guard():
    scalars = [Scalar(i + 1) for i in range(64)]
    with pytest.raises(ParameterError):
        sim.oracle_enumerate_subsets(scalars, 20)  # C(64,20) is astronomical


# ── toy instance plumbing ────────────────────────────────────────────────


def test_round_consistency(toy_instance):
    x, responses, R = toy_instance.run_round()
    assert len(responses) == toy_instance.params.l
    assert R == snod_receiver_aggregate(list(responses), toy_instance.params.l)
    assert toy_instance.transcript[-1][0] == x


def test_fresh_tags_never_repeat(toy_instance):
    tags = {toy_instance.fresh_tag().data for _ in range(100)}
    assert len(tags) == 100


# ── collusion experiments ────────────────────────────────────────────────


def test_positive_control_full_knowledge_always_wins(toy_instance, rng):
    report = sim.run_collusion_experiment(
        toy_instance, trials=50, colluding_parties=toy_instance.params.l, rng=rng
    )
    assert report.prediction_successes == 50
    assert report.partial_aggregate_matches == 50


def test_degenerate_single_party_zero_knowledge(rng):
    # Full-width table: on toy-sized index spaces (56 subsets) a replaying
    # adversary collides by chance, which is precisely what the combination
    # bound is there to prevent.
    params = SnodParams(v=18, n=1024, l=1, check_combination_bound=False)
    instance = sim.make_instance(params, rng)
    report = sim.run_collusion_experiment(instance, trials=50, colluding_parties=0, rng=rng)
    assert report.prediction_successes == 0
    assert report.partial_aggregate_matches == 0


def test_toy_spaces_leak_by_collision(rng):
    # Negative control for the control: with only C(8,3)=56 possible index
    # sets, transcript replay eventually predicts a response.
    params = SnodParams(v=3, n=8, l=1, check_combination_bound=False)
    instance = sim.make_instance(params, rng)
    report = sim.run_collusion_experiment(instance, trials=400, colluding_parties=0, rng=rng)
    assert report.prediction_successes > 0


def test_full_size_collusion_never_predicts(default_keyset, rng):
    sk, pk, shares = default_keyset
    instance = sim.ToyInstance(
        params=sk.params,
        signing_key=sk,
        public_key=pk,
        shares=tuple(shares),
    )
    report = sim.run_collusion_experiment(instance, trials=100, rng=rng)
    assert report.colluding_parties == 2
    assert report.prediction_successes == 0
    assert report.partial_aggregate_matches == 0


# ── uniformity experiments ───────────────────────────────────────────────


def test_chi_square_on_exactly_uniform_counts():
    result = sim.chi_square_uniform([100] * 56)
    assert result.statistic == 0.0
    assert result.p_value == pytest.approx(1.0)
    assert result.dof == 55
    assert result.passes()


def test_bpv_subsets_uniform():
    result = sim.run_uniformity_test(TOY_PARAMS, draws=20_000, source="bpv", rng=random.Random(5))
    assert result.cells == 56
    assert result.draws == 20_000
    assert result.passes(0.001)


def test_h1_subsets_uniform():
    result = sim.run_uniformity_test(TOY_PARAMS, draws=20_000, source="h1", rng=random.Random(6))
    assert result.passes(0.001)


def test_rigged_sampler_fails():
    result = sim.run_uniformity_test(TOY_PARAMS, draws=20_000, source="rigged", rng=random.Random(7))
    assert not result.passes(0.001)


def test_unknown_source_rejected(rng):
    with pytest.raises(ParameterError):
        sim.run_uniformity_test(TOY_PARAMS, draws=10, source="nope", rng=rng)


def test_csv_report_conventions(toy_instance, rng):
    report = sim.run_collusion_experiment(toy_instance, trials=10, rng=rng)
    blob = sim.emit_collusion_report([("toy", report)]).decode()
    lines = blob.strip().split("\n")
    assert lines[0] == sim.COLLUSION_CSV_HEADER
    assert lines[1].startswith("toy,10,1,")

    result = sim.run_uniformity_test(TOY_PARAMS, draws=1000, source="bpv", rng=rng)
    blob = sim.emit_uniformity_report([("bpv", result)]).decode()
    lines = blob.strip().split("\n")
    assert lines[0] == sim.UNIFORMITY_CSV_HEADER
    fields = lines[1].split(",")
    assert fields[1] == "56" and fields[2] == "1000"
