"""Single-party BPV generator: precompute n nonce pairs, combine random
v-subsets online.

This is the classic baseline the distributed variant is measured against;
subset selection here uses true randomness (the distributed variant derives
its index sets deterministically from the commitment tag).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from . import groupmath as gm
from .errors import ParameterError
from .groupmath import GroupElement, OpCounter, Scalar

_SYSRAND = random.SystemRandom()


@dataclass(frozen=True)
class BpvTable:
    """Precomputed pairs (r_i, R_i) with R_i = r_i * generator."""

    pairs: Tuple[Tuple[Scalar, GroupElement], ...]
    v: int

    @property
    def n(self) -> int:
        return len(self.pairs)


def sample_subset(n: int, v: int, rng: Optional[random.Random] = None) -> Tuple[int, ...]:
    """Uniform v-subset of [0, n-1] via a partial Fisher-Yates shuffle."""
    rng = rng or _SYSRAND
    idx = list(range(n))
    for t in range(v):
        swap = rng.randrange(t, n)
        idx[t], idx[swap] = idx[swap], idx[t]
    return tuple(idx[:v])


def bpv_offline(
    v: int,
    n: int,
    rng: Optional[random.Random] = None,
    ops: Optional[OpCounter] = None,
) -> BpvTable:
    if not 2 < v < n:
        raise ParameterError(f"need 2 < v < n, got v={v}, n={n}")
    pairs = []
    for _ in range(n):
        r = gm.random_scalar(rng)
        pairs.append((r, gm.mul_basepoint(r, ops)))
    return BpvTable(pairs=tuple(pairs), v=v)


def bpv_online(
    table: BpvTable,
    rng: Optional[random.Random] = None,
    ops: Optional[OpCounter] = None,
) -> Tuple[Scalar, GroupElement]:
    """Draw a fresh (r, R) pair; R = r * generator by construction."""
    subset = sample_subset(table.n, table.v, rng)
    return combine_subset(table, subset, ops)


def combine_subset(
    table: BpvTable,
    subset: Sequence[int],
    ops: Optional[OpCounter] = None,
) -> Tuple[Scalar, GroupElement]:
    """Sum the selected pairs: r = sum r_i mod q, R = sum R_i."""
    first = table.pairs[subset[0]]
    r, R = first
    for i in subset[1:]:
        pair = table.pairs[i]
        r = gm.scalar_add(r, pair[0], ops)
        R = gm.add_points(R, pair[1], ops)
    return r, R
