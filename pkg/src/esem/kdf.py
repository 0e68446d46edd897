"""Symmetric machinery: keyed PRF, digest-to-tag, index derivation, hash-to-scalar.

All four functions are instantiated from one primitive, BLAKE2b (stdlib),
separated by a 1-byte domain tag prefixed to the hashed input:

    0x00  PRF_0   keyed BLAKE2b, 16-byte output (wide variants for scalars)
    0x01  H_0     plain BLAKE2b truncated to 16 bytes (commitment tags)
    0x02  H_1     counter-chained BLAKE2b blocks consumed as an index stream
    0x03  H_2     wide reduction into Z_q^* (signature challenges)
    0x04  Schnorr challenge (baseline scheme), same construction as H_2

Scalar-valued outputs expand the primitive to at least ⌈log2 q⌉ + 128 bits
before reducing, so results are statistically uniform in Z_q.  Everything
here is a pure function of its inputs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .errors import ParameterError
from .groupmath import OpCounter, Scalar, q

KAPPA = 128
SEED_LEN = KAPPA // 8
TAG_LEN = KAPPA // 8

TAG_PRF0 = b"\x00"
TAG_H0 = b"\x01"
TAG_H1 = b"\x02"
TAG_H2 = b"\x03"
TAG_SCHNORR = b"\x04"

# Wide output sizes in bytes; both exceed ⌈log2 q⌉ + 128 = 380 bits.
_PRF_WIDE_LEN = 48
_CHALLENGE_WIDE_LEN = 64

_blake2b = hashlib.blake2b


@dataclass(frozen=True)
class Seed:
    """16-byte (κ-bit) secret seed, e.g. a party seed z_j."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) != SEED_LEN:
            raise ParameterError(f"seed must be {SEED_LEN} bytes, got {len(self.data)}")


@dataclass(frozen=True)
class CommitmentTag:
    """16-byte one-time commitment tag x = H_0(sk||c)."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) != TAG_LEN:
            raise ParameterError(f"tag must be {TAG_LEN} bytes, got {len(self.data)}")

    def hex(self) -> str:
        return self.data.hex()


@dataclass(frozen=True)
class IndexSet:
    """v distinct table indexes in [0, n-1], in derivation order."""

    indexes: Tuple[int, ...]
    v: int
    n: int

    def __post_init__(self) -> None:
        if len(self.indexes) != self.v:
            raise ParameterError("index set must contain exactly v indexes")
        if len(set(self.indexes)) != self.v:
            raise ParameterError("index set contains duplicates")
        if any(not 0 <= i < self.n for i in self.indexes):
            raise ParameterError("index out of range")


def index_bytes(i: int) -> bytes:
    """Fixed-width encoding of party/table indexes inside PRF inputs."""
    return i.to_bytes(4, "big")


def counter_bytes(c: int) -> bytes:
    """Fixed-width encoding of the signing counter inside H_0 input."""
    return c.to_bytes(8, "big")


def _key_bytes(key: Union[Seed, bytes]) -> bytes:
    return key.data if isinstance(key, Seed) else key


def prf0(key: Union[Seed, bytes], msg: bytes, ops: Optional[OpCounter] = None) -> bytes:
    """Keyed 16-byte PRF block."""
    if ops is not None:
        ops.prf_calls += 1
    return _blake2b(TAG_PRF0 + msg, key=_key_bytes(key), digest_size=TAG_LEN).digest()


def derive_scalar(key: Union[Seed, bytes], label: bytes, ops: Optional[OpCounter] = None) -> Scalar:
    """PRF expanded to 384 bits and reduced mod q (uniform in Z_q)."""
    if ops is not None:
        ops.prf_calls += 1
    wide = _blake2b(TAG_PRF0 + label, key=_key_bytes(key), digest_size=_PRF_WIDE_LEN).digest()
    return Scalar(int.from_bytes(wide, "little") % q)


def h0(data: bytes, ops: Optional[OpCounter] = None) -> CommitmentTag:
    """16-byte commitment-tag digest."""
    if ops is not None:
        ops.hash_calls += 1
    return CommitmentTag(_blake2b(TAG_H0 + data, digest_size=TAG_LEN).digest())


def _index_stream(z: bytes, x: bytes, v: int, n: int) -> Tuple[int, ...]:
    """Unvalidated core of h1_indexes, shared with the signer hot loop.

    Counter-chained 64-byte BLAKE2b blocks over (z||x), consumed big-endian
    in ⌈log2 n⌉-bit chunks; duplicates are skipped, so exactly v distinct
    indexes always come out (requires n a power of two).
    """
    chunk_bits = (n - 1).bit_length()
    per_block = (8 * _CHALLENGE_WIDE_LEN) // chunk_bits
    mask = n - 1
    prefix = TAG_H1 + z + x

    chosen: list = []
    seen: set = set()
    block_index = 0
    while len(chosen) < v:
        block = _blake2b(
            prefix + block_index.to_bytes(4, "big"), digest_size=_CHALLENGE_WIDE_LEN
        ).digest()
        bits = int.from_bytes(block, "big")
        pos = 8 * _CHALLENGE_WIDE_LEN
        taken = 0
        while taken < per_block and len(chosen) < v:
            pos -= chunk_bits
            candidate = (bits >> pos) & mask
            taken += 1
            if candidate not in seen:
                seen.add(candidate)
                chosen.append(candidate)
        block_index += 1
    return tuple(chosen)


def h1_indexes(
    z: Seed,
    x: CommitmentTag,
    v: int,
    n: int,
    ops: Optional[OpCounter] = None,
) -> IndexSet:
    """Derive the v distinct indexes selected by (z, x)."""
    if not 2 < v < n:
        raise ParameterError(f"need 2 < v < n, got v={v}, n={n}")
    if n & (n - 1):
        raise ParameterError(f"table size must be a power of two, got {n}")
    if ops is not None:
        ops.hash_calls += 1
    return IndexSet(_index_stream(z.data, x.data, v, n), v=v, n=n)


def _challenge(tag: bytes, data: bytes) -> Scalar:
    wide = int.from_bytes(_blake2b(tag + data, digest_size=_CHALLENGE_WIDE_LEN).digest(), "little")
    # Maps into Z_q^* without a retry loop.
    return Scalar(1 + wide % (q - 1))


def h2_challenge(m: bytes, x: CommitmentTag, ops: Optional[OpCounter] = None) -> Scalar:
    """Signature challenge H_2(m||x), valued in Z_q^*."""
    if ops is not None:
        ops.hash_calls += 1
    return _challenge(TAG_H2, m + x.data)


def schnorr_challenge(m: bytes, commitment: bytes, ops: Optional[OpCounter] = None) -> Scalar:
    """Challenge hash of the Schnorr baseline, H(m||R), valued in Z_q^*."""
    if ops is not None:
        ops.hash_calls += 1
    return _challenge(TAG_SCHNORR, m + commitment)
