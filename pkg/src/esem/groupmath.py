"""Prime-order group abstraction with operation-count instrumentation.

The group is ristretto255 (order q ≈ 2^252, 32-byte canonical encodings for
both scalars and points).  Scalars encode as 32-byte little-endian reduced
integers; decoding is strict: a non-canonical encoding (value >= q, invalid
point) is rejected, never silently reduced.

Every operation takes an optional :class:`OpCounter`; when given, the
counter field matching the operation is incremented.  Counters belong to an
explicit measurement scope owned by the caller; there is no global state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

from . import _ristretto as _rt
from .errors import DecodeError

q = _rt.ORDER
SCALAR_LEN = 32
POINT_LEN = 32

_SYSRAND = random.SystemRandom()


class OpCounter:
    """Mutable operation counters for one measurement scope.

    Fields only ever increase while the scope is alive; take a ``copy()``
    before an operation and use ``delta()`` to read what it performed.
    """

    FIELDS = (
        "fixed_base_mults",
        "var_base_mults",
        "point_adds",
        "scalar_mults",
        "scalar_adds",
        "prf_calls",
        "hash_calls",
    )

    __slots__ = FIELDS

    def __init__(self) -> None:
        for name in self.FIELDS:
            setattr(self, name, 0)

    def copy(self) -> "OpCounter":
        other = OpCounter()
        for name in self.FIELDS:
            setattr(other, name, getattr(self, name))
        return other

    def delta(self, earlier: "OpCounter") -> Dict[str, int]:
        """Per-field difference ``self - earlier`` (all fields, zeros kept)."""
        return {
            name: getattr(self, name) - getattr(earlier, name)
            for name in self.FIELDS
        }

    @property
    def group_ops(self) -> int:
        return self.fixed_base_mults + self.var_base_mults + self.point_adds

    def as_dict(self) -> Dict[str, int]:
        return {name: getattr(self, name) for name in self.FIELDS}

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.as_dict().items())
        return f"OpCounter({inner})"


class Scalar:
    """Element of Z_q, always fully reduced."""

    __slots__ = ("value",)

    def __init__(self, value: int) -> None:
        self.value = value % q

    @classmethod
    def from_bytes(cls, data: bytes) -> "Scalar":
        if len(data) != SCALAR_LEN:
            raise DecodeError(f"scalar encoding must be {SCALAR_LEN} bytes, got {len(data)}")
        value = int.from_bytes(data, "little")
        if value >= q:
            raise DecodeError("non-canonical scalar encoding (value >= group order)")
        return cls(value)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(SCALAR_LEN, "little")

    def is_zero(self) -> bool:
        return self.value == 0

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Scalar) and self.value == other.value

    def __hash__(self) -> int:
        return hash(("Scalar", self.value))

    def __repr__(self) -> str:
        return f"Scalar(0x{self.value:x})"


class GroupElement:
    """Element of the prime-order group, with cached canonical encoding."""

    __slots__ = ("_pt", "_enc")

    def __init__(self, pt: _rt.Point, enc: Optional[bytes] = None) -> None:
        self._pt = pt
        self._enc = enc

    @classmethod
    def from_bytes(cls, data: bytes) -> "GroupElement":
        """Decode and validate; only canonical prime-order encodings pass."""
        try:
            pt = _rt.decode(data)
        except ValueError as exc:
            raise DecodeError(str(exc)) from None
        return cls(pt, bytes(data))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(_rt.IDENTITY, b"\x00" * POINT_LEN)

    @classmethod
    def generator(cls) -> "GroupElement":
        return cls(_rt.BASE)

    def to_bytes(self) -> bytes:
        if self._enc is None:
            self._enc = _rt.encode(self._pt)
        return self._enc

    def is_identity(self) -> bool:
        return _rt.pt_is_identity(self._pt)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GroupElement) and _rt.pt_eq(self._pt, other._pt)

    def __hash__(self) -> int:
        return hash(("GroupElement", self.to_bytes()))

    def __repr__(self) -> str:
        return f"GroupElement({self.to_bytes().hex()})"


class GroupId(Enum):
    RISTRETTO255 = 1


@dataclass(frozen=True)
class GroupParams:
    """Static description of the configured group."""

    group_id: GroupId
    q: int
    generator: GroupElement
    scalar_len: int
    point_len: int


RISTRETTO255 = GroupParams(
    group_id=GroupId.RISTRETTO255,
    q=q,
    generator=GroupElement.generator(),
    scalar_len=SCALAR_LEN,
    point_len=POINT_LEN,
)


# ── scalar arithmetic ────────────────────────────────────────────────────


def random_scalar(rng: Optional[random.Random] = None, nonzero: bool = True) -> Scalar:
    """Uniform scalar from the given entropy source (default OS entropy)."""
    rng = rng or _SYSRAND
    lo = 1 if nonzero else 0
    return Scalar(rng.randrange(lo, q))


def scalar_add(a: Scalar, b: Scalar, ops: Optional[OpCounter] = None) -> Scalar:
    if ops is not None:
        ops.scalar_adds += 1
    return Scalar((a.value + b.value) % q)


def scalar_sub(a: Scalar, b: Scalar, ops: Optional[OpCounter] = None) -> Scalar:
    if ops is not None:
        ops.scalar_adds += 1
    return Scalar((a.value - b.value) % q)


def scalar_mul(a: Scalar, b: Scalar, ops: Optional[OpCounter] = None) -> Scalar:
    if ops is not None:
        ops.scalar_mults += 1
    return Scalar((a.value * b.value) % q)


def scalar_neg(a: Scalar) -> Scalar:
    return Scalar(q - a.value if a.value else 0)


def scalar_inv(a: Scalar) -> Scalar:
    if a.value == 0:
        raise ZeroDivisionError("0 has no inverse in Z_q")
    return Scalar(pow(a.value, q - 2, q))


# ── group arithmetic ─────────────────────────────────────────────────────


def mul_basepoint(k: Scalar, ops: Optional[OpCounter] = None) -> GroupElement:
    """k·α via the fixed-base window table."""
    if ops is not None:
        ops.fixed_base_mults += 1
    return GroupElement(_rt.mul_base(k.value))


def mul_point(k: Scalar, point: GroupElement, ops: Optional[OpCounter] = None) -> GroupElement:
    """k·P for arbitrary P (variable-base)."""
    if ops is not None:
        ops.var_base_mults += 1
    return GroupElement(_rt.mul(k.value, point._pt))


def add_points(p: GroupElement, other: GroupElement, ops: Optional[OpCounter] = None) -> GroupElement:
    if ops is not None:
        ops.point_adds += 1
    return GroupElement(_rt.pt_add(p._pt, other._pt))


def negate_point(p: GroupElement) -> GroupElement:
    return GroupElement(_rt.pt_neg(p._pt))
