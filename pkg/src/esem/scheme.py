"""The ESEM signature scheme: Kg / Sig / Ver plus the table-cached variant.

Signing derives everything from (y, counter): the one-time tag x commits to
the counter, the nonce r is a PRF subset sum, and s = r - H_2(m||x)*y.  The
48-byte signature is s||x.  Verification reconstructs the commitment R for
x from a pluggable commitment source (in-process shares, or the network
client in :mod:`esem.party_protocol`) and checks R = H_2(m||x)*Y + s*G.

Counter discipline is fatal-on-reuse (two signatures under one counter leak
the key through two linear equations), so the durable signer persists the
advanced counter before computing a signature: a crash can waste a counter
value but never repeat one.

File formats (multi-byte header integers big-endian):
    signing key "ESMK": magic, version, mode, group id, v, n, l, y, counter,
        nonce table (ESEM2 only, l*n*32 bytes, party-major), integrity tag.
    public key  "ESMP": magic, version, group id, v, n, l, Y.
"""

from __future__ import annotations

import dataclasses
import hashlib
import os
import random
import struct
import tempfile
import threading
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

from . import groupmath as gm
from . import kdf
from .errors import (
    CommitmentUnavailable,
    CounterError,
    DecodeError,
    IntegrityError,
    ParameterError,
)
from .groupmath import GroupElement, GroupId, OpCounter, Scalar, q
from .kdf import (
    CommitmentTag,
    Seed,
    counter_bytes,
    derive_scalar,
    h0,
    h2_challenge,
    index_bytes,
    prf0,
)
from .snodbpv import (
    ESEM_PARAMS,
    ESEM2_PARAMS,
    PartyShare,
    SnodParams,
    snod_offline,
    snod_party_construct,
    snod_receiver_aggregate,
    snod_sender,
)

SIGNATURE_LEN = 48  # s(32) || x(16)
COUNTER_MAX = 2**64 - 1

SIGNING_KEY_MAGIC = b"ESMK"
PUBLIC_KEY_MAGIC = b"ESMP"
KEY_FILE_VERSION = 1
_SK_HEADER = struct.Struct(">4sBBBHIB")  # magic, version, mode, group, v, n, l
_PK_HEADER = struct.Struct(">4sBBHIB")  # magic, version, group, v, n, l
_INTEGRITY_LEN = 32


class EsemMode(IntEnum):
    ESEM = 1
    ESEM2 = 2


class VerifyOutcome(Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    UNAVAILABLE = "unavailable"


@dataclass
class EsemSigningKey:
    """Long-term secret y with its strictly increasing signing counter."""

    y: Scalar
    counter: int
    params: SnodParams
    mode: EsemMode = EsemMode.ESEM
    nonce_table: Optional[Tuple[Tuple[Scalar, ...], ...]] = None
    # Counter reservations serialize on this; a key is a single-writer resource.
    _lock: threading.Lock = dataclasses.field(
        default_factory=threading.Lock, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.y.is_zero():
            raise ParameterError("signing key must be nonzero")
        if not 0 <= self.counter <= COUNTER_MAX:
            raise ParameterError("counter out of 64-bit range")
        if self.mode is EsemMode.ESEM2:
            if self.nonce_table is None:
                raise ParameterError("ESEM2 key requires a nonce table")
            if len(self.nonce_table) != self.params.l or any(
                len(row) != self.params.n for row in self.nonce_table
            ):
                raise ParameterError("nonce table shape must be l x n")
        elif self.nonce_table is not None:
            raise ParameterError("ESEM key must not carry a nonce table")

    @property
    def nonce_table_nbytes(self) -> int:
        if self.nonce_table is None:
            return 0
        return self.params.l * self.params.n * gm.SCALAR_LEN


@dataclass(frozen=True)
class EsemPublicKey:
    Y: GroupElement
    params: SnodParams
    group_id: GroupId = GroupId.RISTRETTO255


@dataclass(frozen=True)
class EsemSignature:
    s: Scalar
    x: CommitmentTag

    def to_bytes(self) -> bytes:
        return self.s.to_bytes() + self.x.data

    @classmethod
    def from_bytes(cls, data: bytes) -> "EsemSignature":
        if len(data) != SIGNATURE_LEN:
            raise DecodeError(f"signature must be {SIGNATURE_LEN} bytes, got {len(data)}")
        return cls(Scalar.from_bytes(data[:32]), CommitmentTag(data[32:]))


def key_id(pk: EsemPublicKey) -> bytes:
    """16-byte share-addressing identifier bound to the public key."""
    return h0(pk.Y.to_bytes()).data


def keygen(
    params: SnodParams = ESEM_PARAMS,
    rng: Optional[random.Random] = None,
    ops: Optional[OpCounter] = None,
) -> Tuple[EsemSigningKey, EsemPublicKey, List[PartyShare]]:
    """Fresh keypair plus the l party shares derived from it."""
    y = gm.random_scalar(rng)
    Y = gm.mul_basepoint(y, ops)
    pk = EsemPublicKey(Y=Y, params=params)
    shares = snod_offline(y, params, key_id=key_id(pk), ops=ops)
    sk = EsemSigningKey(y=y, counter=0, params=params)
    return sk, pk, shares


def sign_at_counter(
    m: bytes,
    sk: EsemSigningKey,
    counter: int,
    ops: Optional[OpCounter] = None,
) -> EsemSignature:
    """Deterministic signature for an explicit counter value.

    Does not advance or persist anything; counter uniqueness is entirely the
    caller's burden.  Reusing a counter across two messages hands out the
    private key.
    """
    params = sk.params
    if sk.mode is EsemMode.ESEM2:
        # Table-cached path: identical output, no wide-PRF calls.
        y_bytes = sk.y.to_bytes()
        x = h0(y_bytes + counter_bytes(counter), ops)
        acc = 0
        table = sk.nonce_table
        for j in range(1, params.l + 1):
            z_j = prf0(y_bytes, index_bytes(j), ops)
            row = table[j - 1]
            for i in kdf._index_stream(z_j, x.data, params.v, params.n):
                acc += row[i].value
        if ops is not None:
            ops.hash_calls += params.l
            ops.scalar_adds += params.v * params.l - 1
        r = Scalar(acc % q)
    else:
        r, x = snod_sender(sk.y, counter, params, ops)
    h = h2_challenge(m, x, ops)
    s = gm.scalar_sub(r, gm.scalar_mul(h, sk.y, ops), ops)
    return EsemSignature(s=s, x=x)


def sign(m: bytes, sk: EsemSigningKey, ops: Optional[OpCounter] = None) -> EsemSignature:
    """Sign under the key's current counter and advance it (in memory only).

    The counter reservation is atomic, so concurrent callers never share a
    value; use :class:`PersistentSigner` when it must also survive crashes.
    """
    with sk._lock:
        reserved = sk.counter
        if reserved >= COUNTER_MAX:
            raise CounterError("signing counter exhausted")
        sk.counter = reserved + 1
    return sign_at_counter(m, sk, reserved, ops)


def esem2_expand(sk: EsemSigningKey, ops: Optional[OpCounter] = None) -> EsemSigningKey:
    """Switch the key to the table-cached mode by precomputing all l*n
    nonce scalars (the speed-for-storage trade)."""
    if sk.mode is not EsemMode.ESEM:
        raise ParameterError("key is already in table-cached mode")
    y_bytes = sk.y.to_bytes()
    table = []
    for j in range(1, sk.params.l + 1):
        z_j = Seed(prf0(y_bytes, index_bytes(j), ops))
        table.append(
            tuple(derive_scalar(z_j, index_bytes(i), ops) for i in range(sk.params.n))
        )
    sk.nonce_table = tuple(table)
    sk.mode = EsemMode.ESEM2
    return sk


# ── commitment sources and verification ──────────────────────────────────


class CommitmentSource(Protocol):
    """Anything able to reconstruct R for a given (key id, x)."""

    def obtain(
        self, kid: bytes, x: CommitmentTag, ops: Optional[OpCounter] = None
    ) -> GroupElement: ...


class LocalPartySet:
    """In-process commitment source: all parties run in this process.

    Holds shares for any number of keys; a key verifies only when every one
    of its l parties is present (no partial aggregation).
    """

    def __init__(self, shares: Sequence[PartyShare] = ()) -> None:
        self._by_key: Dict[bytes, Dict[int, PartyShare]] = {}
        for share in shares:
            self.add_share(share)

    def add_share(self, share: PartyShare) -> None:
        self._by_key.setdefault(share.key_id, {})[share.party_index] = share

    def remove_party(self, kid: bytes, party_index: int) -> None:
        """Drop one party's share (fault injection in tests)."""
        self._by_key.get(kid, {}).pop(party_index, None)

    def obtain(
        self, kid: bytes, x: CommitmentTag, ops: Optional[OpCounter] = None
    ) -> GroupElement:
        shares = self._by_key.get(kid)
        if not shares:
            raise CommitmentUnavailable("no shares for key id", {"key_id": kid.hex()})
        party_count = next(iter(shares.values())).party_count
        responses: List[Optional[GroupElement]] = [
            snod_party_construct(shares[j], x, ops) if j in shares else None
            for j in range(1, party_count + 1)
        ]
        return snod_receiver_aggregate(responses, party_count, ops)


def verify(
    m: bytes,
    sig: EsemSignature,
    pk: EsemPublicKey,
    source: CommitmentSource,
    ops: Optional[OpCounter] = None,
) -> VerifyOutcome:
    """Three-way verification: accept / reject / unavailable.

    Unavailability (a party down, endpoint unreachable) is a liveness
    failure, not a forgery verdict, and is reported distinctly.
    """
    try:
        R = source.obtain(key_id(pk), sig.x, ops)
    except CommitmentUnavailable:
        return VerifyOutcome.UNAVAILABLE
    h = h2_challenge(m, sig.x, ops)
    expected = gm.add_points(
        gm.mul_point(h, pk.Y, ops), gm.mul_basepoint(sig.s, ops), ops
    )
    return VerifyOutcome.ACCEPT if R == expected else VerifyOutcome.REJECT


# ── key files ────────────────────────────────────────────────────────────


def encode_signing_key(sk: EsemSigningKey) -> bytes:
    body = _SK_HEADER.pack(
        SIGNING_KEY_MAGIC,
        KEY_FILE_VERSION,
        int(sk.mode),
        GroupId.RISTRETTO255.value,
        sk.params.v,
        sk.params.n,
        sk.params.l,
    )
    body += sk.y.to_bytes() + sk.counter.to_bytes(8, "big")
    if sk.mode is EsemMode.ESEM2:
        body += b"".join(r.to_bytes() for row in sk.nonce_table for r in row)
    return body + hashlib.blake2b(body, digest_size=_INTEGRITY_LEN).digest()


def decode_signing_key(data: bytes) -> EsemSigningKey:
    if len(data) < _SK_HEADER.size + 40 + _INTEGRITY_LEN:
        raise DecodeError("signing key file truncated")
    body, tag = data[:-_INTEGRITY_LEN], data[-_INTEGRITY_LEN:]
    if hashlib.blake2b(body, digest_size=_INTEGRITY_LEN).digest() != tag:
        raise IntegrityError("signing key file integrity tag mismatch")
    magic, version, mode_raw, group_raw, v, n, l = _SK_HEADER.unpack_from(body)
    if magic != SIGNING_KEY_MAGIC:
        raise DecodeError("bad signing key magic")
    if version != KEY_FILE_VERSION:
        raise DecodeError(f"unsupported key file version {version}")
    if group_raw != GroupId.RISTRETTO255.value:
        raise DecodeError(f"unsupported group id {group_raw}")
    try:
        mode = EsemMode(mode_raw)
    except ValueError:
        raise DecodeError(f"unknown mode byte {mode_raw}") from None
    params = SnodParams(v=v, n=n, l=l)
    offset = _SK_HEADER.size
    y = Scalar.from_bytes(body[offset : offset + 32])
    counter = int.from_bytes(body[offset + 32 : offset + 40], "big")
    offset += 40
    nonce_table = None
    if mode is EsemMode.ESEM2:
        expected = offset + l * n * gm.SCALAR_LEN
        if len(body) != expected:
            raise DecodeError("signing key nonce table length mismatch")
        rows = []
        for j in range(l):
            row_off = offset + j * n * gm.SCALAR_LEN
            rows.append(
                tuple(
                    Scalar.from_bytes(body[p : p + 32])
                    for p in range(row_off, row_off + n * gm.SCALAR_LEN, 32)
                )
            )
        nonce_table = tuple(rows)
    elif len(body) != offset:
        raise DecodeError("trailing bytes in signing key file")
    return EsemSigningKey(
        y=y, counter=counter, params=params, mode=mode, nonce_table=nonce_table
    )


def encode_public_key(pk: EsemPublicKey) -> bytes:
    return (
        _PK_HEADER.pack(
            PUBLIC_KEY_MAGIC,
            KEY_FILE_VERSION,
            pk.group_id.value,
            pk.params.v,
            pk.params.n,
            pk.params.l,
        )
        + pk.Y.to_bytes()
    )


def decode_public_key(data: bytes) -> EsemPublicKey:
    if len(data) != _PK_HEADER.size + gm.POINT_LEN:
        raise DecodeError("public key file length mismatch")
    magic, version, group_raw, v, n, l = _PK_HEADER.unpack_from(data)
    if magic != PUBLIC_KEY_MAGIC:
        raise DecodeError("bad public key magic")
    if version != KEY_FILE_VERSION:
        raise DecodeError(f"unsupported key file version {version}")
    if group_raw != GroupId.RISTRETTO255.value:
        raise DecodeError(f"unsupported group id {group_raw}")
    Y = GroupElement.from_bytes(data[_PK_HEADER.size :])
    return EsemPublicKey(Y=Y, params=SnodParams(v=v, n=n, l=l))


def _write_durable(path, data: bytes) -> None:
    """Atomic replace with fsync of both file and directory."""
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".esem-tmp-")
    try:
        os.write(fd, data)
        os.fsync(fd)
    finally:
        os.close(fd)
    os.replace(tmp, path)
    dir_fd = os.open(directory, os.O_RDONLY)
    try:
        os.fsync(dir_fd)
    finally:
        os.close(dir_fd)


def save_signing_key(sk: EsemSigningKey, path) -> None:
    _write_durable(path, encode_signing_key(sk))


def load_signing_key(path) -> EsemSigningKey:
    with open(path, "rb") as fh:
        return decode_signing_key(fh.read())


def save_public_key(pk: EsemPublicKey, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_public_key(pk))


def load_public_key(path) -> EsemPublicKey:
    with open(path, "rb") as fh:
        return decode_public_key(fh.read())


class PersistentSigner:
    """Crash-safe signer over a key file: reserve the counter, then sign.

    The advanced counter hits disk (fsync'd atomic replace) before any
    signature bytes exist, so a crash at any point wastes at most one
    counter value and can never reuse one.  Concurrent sign calls on one
    instance serialize on an internal lock.

    ``after_reserve`` is a test seam invoked between the durable reservation
    and the signature computation (crash-injection harnesses hook it).
    """

    def __init__(self, path, after_reserve=None) -> None:
        self._path = path
        self._key = load_signing_key(path)
        self._lock = threading.Lock()
        self._after_reserve = after_reserve

    @property
    def counter(self) -> int:
        return self._key.counter

    @property
    def params(self) -> SnodParams:
        return self._key.params

    def sign(self, m: bytes, ops: Optional[OpCounter] = None) -> EsemSignature:
        with self._lock:
            reserved = self._key.counter
            if reserved >= COUNTER_MAX:
                raise CounterError("signing counter exhausted")
            self._key.counter = reserved + 1
            try:
                save_signing_key(self._key, self._path)
            except OSError as exc:
                self._key.counter = reserved
                raise CounterError(f"could not persist counter: {exc}") from exc
            if self._after_reserve is not None:
                self._after_reserve()
            return sign_at_counter(m, self._key, reserved, ops)
