"""Signer-non-interactive distributed BPV.

Four procedures around one identity: the signer derives the aggregate nonce

    r = sum_j sum_k PRF(z_j, i_{k,j})          (no group operations),

while each party j sums the v precomputed points its own index set selects,
and the receiver multiplies the l responses together, yielding R = r * G.
Index sets are derived per party from (z_j, x), so the request reveals only
the one-time tag x.

Also defines the on-disk party share format ("ESMS", little-endian fields,
trailing 32-byte integrity tag).
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from . import groupmath as gm
from . import kdf
from .errors import CommitmentUnavailable, DecodeError, IntegrityError, ParameterError
from .groupmath import GroupElement, OpCounter, Scalar, q
from .kdf import (
    KAPPA,
    SEED_LEN,
    TAG_LEN,
    CommitmentTag,
    Seed,
    counter_bytes,
    derive_scalar,
    h0,
    h1_indexes,
    index_bytes,
    prf0,
)

SHARE_MAGIC = b"ESMS"
SHARE_VERSION = 1
_SHARE_HEADER = struct.Struct("<4sBBBHI")  # magic, version, j, l, v, n
_INTEGRITY_LEN = 32


@dataclass(frozen=True)
class SnodParams:
    """BPV parameters (v, n), party count l, security parameter kappa.

    The security requirement is that the joint index space the l parties
    contribute, C(n, v)^l, covers at least 2^kappa combinations.  Toy
    instances used by enumeration tests may waive that bound (never the
    structural ones) via ``check_combination_bound=False``.
    """

    v: int
    n: int
    l: int
    kappa: int = KAPPA
    check_combination_bound: bool = field(default=True, compare=False)

    def __post_init__(self) -> None:
        if not 2 < self.v < self.n:
            raise ParameterError(f"need 2 < v < n, got v={self.v}, n={self.n}")
        if self.n & (self.n - 1):
            raise ParameterError(f"table size must be a power of two, got n={self.n}")
        if self.l < 1:
            raise ParameterError(f"party count must be >= 1, got l={self.l}")
        if self.check_combination_bound and math.comb(self.n, self.v) ** self.l < 2**self.kappa:
            raise ParameterError(
                f"C({self.n},{self.v})^{self.l} provides fewer than 2^{self.kappa} combinations"
            )


# Paper presets: (v, n) for the seed-derived scheme and the table-cached one.
ESEM_PARAMS = SnodParams(v=18, n=1024, l=3)
ESEM2_PARAMS = SnodParams(v=40, n=128, l=3)


@dataclass(frozen=True)
class PartyShare:
    """One party's share A_j = (z_j, v, R_{1..n,j}) plus addressing metadata."""

    party_index: int  # j, 1-based
    party_count: int  # l
    v: int
    key_id: bytes
    seed: Seed
    points: Tuple[GroupElement, ...]

    @property
    def n(self) -> int:
        return len(self.points)

    def __post_init__(self) -> None:
        if not 1 <= self.party_index <= self.party_count:
            raise ParameterError("party index out of range")
        if len(self.key_id) != TAG_LEN:
            raise ParameterError(f"key id must be {TAG_LEN} bytes")
        if not 2 < self.v < len(self.points):
            raise ParameterError("share must hold n > v points")


def derive_party_seed(y: Scalar, j: int, ops: Optional[OpCounter] = None) -> Seed:
    """z_j, the per-party seed derived from the signing key."""
    return Seed(prf0(y.to_bytes(), index_bytes(j), ops))


def snod_offline(
    y: Scalar,
    params: SnodParams,
    key_id: Optional[bytes] = None,
    ops: Optional[OpCounter] = None,
) -> List[PartyShare]:
    """Generate all l party shares, deterministically from y.

    ``key_id`` defaults to h0 of the encoded public key; passing it in saves
    the extra base multiplication when the caller already knows Y.
    """
    if key_id is None:
        key_id = h0(gm.mul_basepoint(y, ops).to_bytes(), ops).data
    shares = []
    for j in range(1, params.l + 1):
        z_j = derive_party_seed(y, j, ops)
        points = []
        for i in range(params.n):
            r_ij = derive_scalar(z_j, index_bytes(i), ops)
            points.append(gm.mul_basepoint(r_ij, ops))
        shares.append(
            PartyShare(
                party_index=j,
                party_count=params.l,
                v=params.v,
                key_id=key_id,
                seed=z_j,
                points=tuple(points),
            )
        )
    return shares


def snod_sender(
    y: Scalar,
    c: int,
    params: SnodParams,
    ops: Optional[OpCounter] = None,
) -> Tuple[Scalar, CommitmentTag]:
    """Signer side: derive (r, x) from the key and counter alone.

    Touches no share and performs zero group operations; the v*l nonce
    scalars are recomputed from seeds on every call (the signer stores no
    precomputed material).  The loop body inlines prf0/derive_scalar for
    speed; byte semantics are identical to the kdf functions and the cross
    checks against party tables in the test suite keep them locked together.
    """
    y_bytes = y.to_bytes()
    x = h0(y_bytes + counter_bytes(c), ops)
    v, n, l = params.v, params.n, params.l
    x_data = x.data
    blk = hashlib.blake2b
    tag = kdf.TAG_PRF0
    wide = kdf._PRF_WIDE_LEN
    acc = 0
    for j in range(1, l + 1):
        z_j = blk(tag + index_bytes(j), key=y_bytes, digest_size=SEED_LEN).digest()
        for i in kdf._index_stream(z_j, x_data, v, n):
            acc += int.from_bytes(
                blk(tag + i.to_bytes(4, "big"), key=z_j, digest_size=wide).digest(),
                "little",
            )
    if ops is not None:
        ops.prf_calls += l + v * l
        ops.hash_calls += l
        ops.scalar_adds += v * l - 1
    return Scalar(acc % q), x


def snod_party_construct(
    share: PartyShare,
    x: CommitmentTag,
    ops: Optional[OpCounter] = None,
) -> GroupElement:
    """Party side: sum the v points selected by (z_j, x)."""
    idx = h1_indexes(share.seed, x, share.v, share.n, ops)
    points = share.points
    acc = points[idx.indexes[0]]
    for i in idx.indexes[1:]:
        acc = gm.add_points(acc, points[i], ops)
    return acc


def snod_receiver_aggregate(
    responses: Sequence[Optional[GroupElement]],
    party_count: int,
    ops: Optional[OpCounter] = None,
) -> GroupElement:
    """Receiver side: multiply all l party responses together.

    The scheme has no quorum: anything short of all l responses raises
    :class:`CommitmentUnavailable` rather than aggregating partially.
    """
    present = [p for p in responses if p is not None]
    if len(responses) != party_count or len(present) != party_count:
        missing = [i + 1 for i, p in enumerate(responses) if p is None]
        raise CommitmentUnavailable(
            f"have {len(present)} of {party_count} party responses",
            diagnostics={j: "missing response" for j in missing} or None,
        )
    acc = present[0]
    for point in present[1:]:
        acc = gm.add_points(acc, point, ops)
    return acc


# ── share files ──────────────────────────────────────────────────────────


def encode_share(share: PartyShare) -> bytes:
    """Serialize to the ESMS format (little-endian, integrity-tagged)."""
    body = _SHARE_HEADER.pack(
        SHARE_MAGIC,
        SHARE_VERSION,
        share.party_index,
        share.party_count,
        share.v,
        share.n,
    )
    body += share.key_id + share.seed.data
    body += b"".join(p.to_bytes() for p in share.points)
    return body + hashlib.blake2b(body, digest_size=_INTEGRITY_LEN).digest()


def decode_share(data: bytes) -> PartyShare:
    """Parse and fully validate an ESMS share file."""
    if len(data) < _SHARE_HEADER.size + TAG_LEN + SEED_LEN + _INTEGRITY_LEN:
        raise DecodeError("share file truncated")
    body, tag = data[:-_INTEGRITY_LEN], data[-_INTEGRITY_LEN:]
    if hashlib.blake2b(body, digest_size=_INTEGRITY_LEN).digest() != tag:
        raise IntegrityError("share file integrity tag mismatch")
    magic, version, j, l, v, n = _SHARE_HEADER.unpack_from(body)
    if magic != SHARE_MAGIC:
        raise DecodeError("bad share file magic")
    if version != SHARE_VERSION:
        raise DecodeError(f"unsupported share file version {version}")
    offset = _SHARE_HEADER.size
    key_id = body[offset : offset + TAG_LEN]
    offset += TAG_LEN
    seed = Seed(body[offset : offset + SEED_LEN])
    offset += SEED_LEN
    expected = offset + n * gm.POINT_LEN
    if len(body) != expected:
        raise DecodeError(f"share file length {len(body)} != expected {expected}")
    points = tuple(
        GroupElement.from_bytes(body[p : p + gm.POINT_LEN])
        for p in range(offset, expected, gm.POINT_LEN)
    )
    return PartyShare(
        party_index=j, party_count=l, v=v, key_id=key_id, seed=seed, points=points
    )


def save_share(share: PartyShare, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_share(share))


def load_share(path) -> PartyShare:
    with open(path, "rb") as fh:
        return decode_share(fh.read())
