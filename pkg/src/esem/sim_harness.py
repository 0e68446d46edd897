"""In-process experiment harness: enumeration oracles, collusion and
uniformity experiments.

Runs l logical parties without sockets on either full-size or toy ("small
enough to enumerate every subset") instances.  Toy parameters keep every
structural invariant but waive the 2^kappa combination bound; that is the
point, C(n, v) must fit in memory for ground-truth enumeration.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

from . import groupmath as gm
from .bpv import sample_subset
from .errors import ParameterError
from .groupmath import GroupElement, Scalar, q
from .kdf import CommitmentTag, Seed, counter_bytes, h0, h1_indexes
from .scheme import EsemPublicKey, EsemSigningKey, keygen
from .snodbpv import (
    PartyShare,
    SnodParams,
    snod_party_construct,
    snod_receiver_aggregate,
)

ENUMERATION_LIMIT = 10**6

TOY_PARAMS = SnodParams(v=3, n=8, l=2, check_combination_bound=False)


@dataclass
class ToyInstance:
    """A complete in-process deployment: key material, all shares, and the
    transcript of every protocol run so far (semi-honest servers record
    everything, and so does the experiment)."""

    params: SnodParams
    signing_key: EsemSigningKey
    public_key: EsemPublicKey
    shares: Tuple[PartyShare, ...]
    transcript: List[Tuple[CommitmentTag, Tuple[GroupElement, ...]]] = field(
        default_factory=list
    )
    _next_counter: int = 0

    def fresh_tag(self) -> CommitmentTag:
        """A never-before-used commitment tag from the key's counter space."""
        c = self._next_counter
        self._next_counter += 1
        return h0(self.signing_key.y.to_bytes() + counter_bytes(c))

    def run_round(self) -> Tuple[CommitmentTag, Tuple[GroupElement, ...], GroupElement]:
        """One full protocol round; appends to the transcript."""
        x = self.fresh_tag()
        responses = tuple(snod_party_construct(s, x) for s in self.shares)
        self.transcript.append((x, responses))
        return x, responses, snod_receiver_aggregate(responses, self.params.l)


def make_instance(
    params: SnodParams = TOY_PARAMS, rng: Optional[random.Random] = None
) -> ToyInstance:
    sk, pk, shares = keygen(params, rng)
    return ToyInstance(
        params=params, signing_key=sk, public_key=pk, shares=tuple(shares)
    )


# ── enumeration oracle ───────────────────────────────────────────────────


def oracle_enumerate_subsets(
    scalars: Sequence[Scalar], v: int
) -> List[Tuple[Tuple[int, ...], Scalar]]:
    """Ground truth for subset-sum outputs: every v-subset and its sum.

    Refuses instances with more than 10^6 subsets; this is a desk-scale
    oracle, not an algorithm.
    """
    import itertools

    n = len(scalars)
    if math.comb(n, v) > ENUMERATION_LIMIT:
        raise ParameterError(f"C({n},{v}) exceeds the enumeration guard")
    out = []
    for subset in itertools.combinations(range(n), v):
        total = 0
        for i in subset:
            total += scalars[i].value
        out.append((subset, Scalar(total % q)))
    return out


# ── collusion experiment ─────────────────────────────────────────────────


@dataclass(frozen=True)
class CollusionReport:
    trials: int
    colluding_parties: int
    prediction_successes: int  # adversary guessed the missing party's response
    partial_aggregate_matches: int  # sum over held shares alone equaled R


class _Adversary:
    """Semi-honest coalition: holds some shares plus the full transcript.

    Its best strategy for a fresh tag is replay: if x was ever answered
    before, the recorded response is exact; otherwise it falls back to the
    most recent recorded response of the missing party (any fixed guess is
    as good, since the index set derivation keyed by the unknown z_j is
    pseudo-random).
    """

    def __init__(self, held: Sequence[PartyShare]) -> None:
        self.held = {s.party_index: s for s in held}
        self.seen: List[Tuple[CommitmentTag, Tuple[GroupElement, ...]]] = []

    def observe(self, x: CommitmentTag, responses: Tuple[GroupElement, ...]) -> None:
        self.seen.append((x, responses))

    def predict_response(self, x: CommitmentTag, party_index: int) -> GroupElement:
        if party_index in self.held:
            return snod_party_construct(self.held[party_index], x)
        for past_x, past_responses in reversed(self.seen):
            if past_x == x:
                return past_responses[party_index - 1]
        if self.seen:
            return self.seen[-1][1][party_index - 1]
        return GroupElement.identity()

    def aggregate_held(self, x: CommitmentTag) -> Optional[GroupElement]:
        if not self.held:
            return None
        acc = None
        for share in self.held.values():
            point = snod_party_construct(share, x)
            acc = point if acc is None else gm.add_points(acc, point)
        return acc


def run_collusion_experiment(
    instance: ToyInstance,
    trials: int,
    colluding_parties: Optional[int] = None,
    rng: Optional[random.Random] = None,
) -> CollusionReport:
    """Give a coalition of servers every advantage the model allows and
    count how often it reproduces the full commitment or the missing
    response for a fresh tag.

    ``colluding_parties`` defaults to l-1; setting it to l is the positive
    control (full knowledge must succeed on every trial).
    """
    params = instance.params
    rng = rng or random.Random()
    if colluding_parties is None:
        colluding_parties = params.l - 1
    if not 0 <= colluding_parties <= params.l:
        raise ParameterError("colluding party count out of range")

    predictions = 0
    partial_matches = 0
    for _ in range(trials):
        held_indexes = rng.sample(range(1, params.l + 1), colluding_parties)
        adversary = _Adversary([instance.shares[j - 1] for j in held_indexes])
        for past in instance.transcript:
            adversary.observe(*past)

        x = instance.fresh_tag()
        truth = tuple(snod_party_construct(s, x) for s in instance.shares)
        R = snod_receiver_aggregate(truth, params.l)

        if colluding_parties == params.l:
            guess = adversary.aggregate_held(x)
            if guess is not None and guess == R:
                predictions += 1
                partial_matches += 1
        else:
            missing = [j for j in range(1, params.l + 1) if j not in held_indexes]
            target = rng.choice(missing)
            if adversary.predict_response(x, target) == truth[target - 1]:
                predictions += 1
            held_aggregate = adversary.aggregate_held(x)
            if held_aggregate is not None and held_aggregate == R:
                partial_matches += 1

        instance.transcript.append((x, truth))

    return CollusionReport(
        trials=trials,
        colluding_parties=colluding_parties,
        prediction_successes=predictions,
        partial_aggregate_matches=partial_matches,
    )


# ── uniformity experiments ───────────────────────────────────────────────


@dataclass(frozen=True)
class UniformityResult:
    statistic: float
    dof: int
    p_value: float
    draws: int
    cells: int

    def passes(self, significance: float = 0.001) -> bool:
        return self.p_value >= significance


def chi_square_uniform(counts: Sequence[int]) -> UniformityResult:
    """Chi-square of observed cell counts against the uniform expectation."""
    from scipy import stats

    draws = int(sum(counts))
    statistic, p_value = stats.chisquare(list(counts))
    return UniformityResult(
        statistic=float(statistic),
        dof=len(counts) - 1,
        p_value=float(p_value),
        draws=draws,
        cells=len(counts),
    )


def _subset_cells(n: int, v: int) -> Dict[FrozenSet[int], int]:
    import itertools

    if math.comb(n, v) > ENUMERATION_LIMIT:
        raise ParameterError(f"C({n},{v}) exceeds the enumeration guard")
    return {
        frozenset(subset): k
        for k, subset in enumerate(itertools.combinations(range(n), v))
    }


def subset_frequencies(
    sampler: Callable[[], FrozenSet[int]], n: int, v: int, draws: int
) -> List[int]:
    """Histogram of sampler outputs over all C(n, v) subset cells."""
    cells = _subset_cells(n, v)
    counts = [0] * len(cells)
    for _ in range(draws):
        counts[cells[frozenset(sampler())]] += 1
    return counts


def bpv_sampler(n: int, v: int, rng: random.Random) -> Callable[[], FrozenSet[int]]:
    """The baseline generator's true-random subset selection."""
    return lambda: frozenset(sample_subset(n, v, rng))


def h1_sampler(
    z: Seed, n: int, v: int, rng: random.Random
) -> Callable[[], FrozenSet[int]]:
    """Index sets the deterministic derivation produces over random tags."""

    def draw() -> FrozenSet[int]:
        x = CommitmentTag(rng.getrandbits(128).to_bytes(16, "little"))
        return frozenset(h1_indexes(z, x, v, n).indexes)

    return draw


def rigged_sampler(n: int, v: int, rng: random.Random) -> Callable[[], FrozenSet[int]]:
    """Deliberately biased sampler (never selects index 0): negative control."""

    def draw() -> FrozenSet[int]:
        while True:
            subset = sample_subset(n, v, rng)
            if 0 not in subset:
                return frozenset(subset)

    return draw


# CSV conventions match the energy report: one header, one row per result.
COLLUSION_CSV_HEADER = (
    "experiment,trials,colluding_parties,prediction_successes,partial_aggregate_matches"
)
UNIFORMITY_CSV_HEADER = "experiment,cells,draws,statistic,dof,p_value,passes"


def emit_collusion_report(reports: Sequence[Tuple[str, CollusionReport]]) -> bytes:
    lines = [COLLUSION_CSV_HEADER]
    for name, r in reports:
        lines.append(
            f"{name},{r.trials},{r.colluding_parties},"
            f"{r.prediction_successes},{r.partial_aggregate_matches}"
        )
    return ("\n".join(lines) + "\n").encode()


def emit_uniformity_report(
    results: Sequence[Tuple[str, UniformityResult]], significance: float = 0.001
) -> bytes:
    lines = [UNIFORMITY_CSV_HEADER]
    for name, r in results:
        lines.append(
            f"{name},{r.cells},{r.draws},{r.statistic:.4f},{r.dof},"
            f"{r.p_value:.6f},{int(r.passes(significance))}"
        )
    return ("\n".join(lines) + "\n").encode()


def run_uniformity_test(
    params: SnodParams,
    draws: int,
    source: str = "bpv",
    rng: Optional[random.Random] = None,
    seed_material: Optional[Seed] = None,
) -> UniformityResult:
    """Chi-square uniformity over all C(n, v) subsets for one sampler.

    ``source`` selects the sampler: "bpv" (true-random baseline), "h1"
    (tag-derived index sets) or "rigged" (biased negative control).
    """
    rng = rng or random.Random()
    n, v = params.n, params.v
    if source == "bpv":
        sampler = bpv_sampler(n, v, rng)
    elif source == "h1":
        z = seed_material or Seed(rng.getrandbits(128).to_bytes(16, "little"))
        sampler = h1_sampler(z, n, v, rng)
    elif source == "rigged":
        sampler = rigged_sampler(n, v, rng)
    else:
        raise ParameterError(f"unknown sampler source {source!r}")
    return chi_square_uniform(subset_frequencies(sampler, n, v, draws))
