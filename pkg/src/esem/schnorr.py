"""Baseline Schnorr signatures over the configured group.

Serves three roles: correctness cross-checks for the main scheme, the
benchmark baseline, and the two-equation key-extraction oracle that makes
nonce reuse observable in tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Tuple

from . import groupmath as gm
from .errors import DecodeError
from .groupmath import GroupElement, OpCounter, Scalar
from .kdf import schnorr_challenge

SIGNATURE_LEN = 64  # s(32) || e(32)


@dataclass(frozen=True)
class SchnorrKeypair:
    y: Scalar
    Y: GroupElement


@dataclass(frozen=True)
class SchnorrSignature:
    s: Scalar
    e: Scalar

    def to_bytes(self) -> bytes:
        return self.s.to_bytes() + self.e.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "SchnorrSignature":
        if len(data) != SIGNATURE_LEN:
            raise DecodeError(f"schnorr signature must be {SIGNATURE_LEN} bytes")
        return cls(Scalar.from_bytes(data[:32]), Scalar.from_bytes(data[32:]))


def keygen(rng: Optional[random.Random] = None, ops: Optional[OpCounter] = None) -> SchnorrKeypair:
    y = gm.random_scalar(rng)
    return SchnorrKeypair(y=y, Y=gm.mul_basepoint(y, ops))


def sign(
    m: bytes,
    y: Scalar,
    rng: Optional[random.Random] = None,
    ops: Optional[OpCounter] = None,
) -> SchnorrSignature:
    r = gm.random_scalar(rng)
    R = gm.mul_basepoint(r, ops)
    e = schnorr_challenge(m, R.to_bytes(), ops)
    s = gm.scalar_sub(r, gm.scalar_mul(e, y, ops), ops)
    return SchnorrSignature(s=s, e=e)


def verify(
    m: bytes,
    sig: SchnorrSignature,
    Y: GroupElement,
    ops: Optional[OpCounter] = None,
) -> bool:
    R = gm.add_points(gm.mul_point(sig.e, Y, ops), gm.mul_basepoint(sig.s, ops), ops)
    return schnorr_challenge(m, R.to_bytes(), ops) == sig.e


def extract_key(sig1: Tuple[Scalar, Scalar], sig2: Tuple[Scalar, Scalar]) -> Scalar:
    """Recover the private key from two same-nonce (s, challenge) pairs.

    Both signatures satisfy r = y*h + s with the same r, giving two linear
    equations; solve for y.  The caller should confirm the result against
    the public key.  Raises ValueError when the challenges coincide (the
    system is singular).
    """
    s1, h1 = sig1
    s2, h2 = sig2
    if h1 == h2:
        raise ValueError("identical challenges: no unique solution")
    num = gm.scalar_sub(s2, s1)
    den = gm.scalar_sub(h1, h2)
    return gm.scalar_mul(num, gm.scalar_inv(den))
