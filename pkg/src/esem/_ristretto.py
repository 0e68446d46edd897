"""Internal ristretto255 group arithmetic (pure Python).

Implements the prime-order group ristretto255 over edwards25519 with the
canonical 32-byte encodings of RFC 9496.  Points are internal extended
coordinates ``(X, Y, Z, T)`` as plain int 4-tuples; scalars are plain ints.
This module is the backend for :mod:`esem.groupmath` and carries no scheme
logic.

Performance notes (this whole package is pure Python by design):
  - addition/doubling use the complete a=-1 extended-coordinate formulas,
  - fixed-base multiplication uses a 4-bit window table over the generator
    built once at import (~6 ms, ~1000 cached points),
  - variable-base multiplication uses a per-call 4-bit window.
"""

from __future__ import annotations

from typing import Optional, Tuple

Point = Tuple[int, int, int, int]

# Field prime and curve constants (edwards25519, RFC 8032 / RFC 9496).
P = 2**255 - 19
D = (-121665 * pow(121666, P - 2, P)) % P
_D2 = (2 * D) % P

# Prime group order of ristretto255 (= order of the edwards25519 subgroup).
ORDER = 2**252 + 27742317777372353535851937790883648493

SQRT_M1 = pow(2, (P - 1) // 4, P)

IDENTITY: Point = (0, 1, 1, 0)

_BASE_X = 15112221349535400772501151409588531511454012693041857206046113283949847762202
_BASE_Y = 46316835694926478169428394003475163141307993866256225615783033603165251855960
BASE: Point = (_BASE_X, _BASE_Y, 1, (_BASE_X * _BASE_Y) % P)


def _is_negative(x: int) -> bool:
    # RFC 9496: a field element is negative iff its canonical encoding is odd.
    return x & 1 == 1


def _abs_fe(x: int) -> int:
    return P - x if _is_negative(x) else x


def _sqrt_ratio_m1(u: int, v: int) -> Tuple[bool, int]:
    """RFC 9496 SQRT_RATIO_M1: return (was_square, r) with r = sqrt(u/v) when
    u/v is square, else r = sqrt(SQRT_M1 * u/v); r is the nonnegative root."""
    v2 = v * v % P
    v3 = v2 * v % P
    v7 = v3 * v3 % P * v % P
    r = u * v3 % P * pow(u * v7 % P, (P - 5) // 8, P) % P
    check = v * (r * r % P) % P

    u_neg = P - u if u else 0
    correct = check == u % P
    flipped = check == u_neg
    flipped_i = check == u_neg * SQRT_M1 % P

    if flipped or flipped_i:
        r = r * SQRT_M1 % P
    return (correct or flipped), _abs_fe(r)


# 1/sqrt(a - d) with a = -1; sqrt_ratio_m1(1, v) already yields |sqrt(1/v)|.
_INVSQRT_A_MINUS_D = _sqrt_ratio_m1(1, (P - 1 - D) % P)[1]


def pt_add(p: Point, q: Point) -> Point:
    X1, Y1, Z1, T1 = p
    X2, Y2, Z2, T2 = q
    A = (Y1 - X1) * (Y2 - X2) % P
    B = (Y1 + X1) * (Y2 + X2) % P
    C = T1 * _D2 % P * T2 % P
    Dd = 2 * Z1 * Z2 % P
    E = B - A
    F = Dd - C
    G = Dd + C
    H = B + A
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def pt_dbl(p: Point) -> Point:
    X1, Y1, Z1, _ = p
    A = X1 * X1 % P
    B = Y1 * Y1 % P
    C = 2 * Z1 * Z1 % P
    H = A + B
    E = H - (X1 + Y1) * (X1 + Y1) % P
    G = A - B
    F = C + G
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def pt_neg(p: Point) -> Point:
    X, Y, Z, T = p
    return (P - X if X else 0, Y, Z, P - T if T else 0)


def pt_eq(p: Point, q: Point) -> bool:
    # RFC 9496 group equality: representatives of the same ristretto element
    # may differ as edwards points, so projective coordinate equality is wrong.
    X1, Y1 = p[0], p[1]
    X2, Y2 = q[0], q[1]
    return X1 * Y2 % P == Y1 * X2 % P or X1 * X2 % P == Y1 * Y2 % P


def pt_is_identity(p: Point) -> bool:
    return p[0] % P == 0 or p[1] % P == 0


# ── fixed-base window table ──────────────────────────────────────────────
# _BASE_TABLE[t][val] = val * 2^(4t) * BASE  for val in 1..15, t in 0..63.

_WINDOW = 4
_NWIN = 64


def _build_base_table() -> list:
    tables = []
    row_base = BASE
    for _ in range(_NWIN):
        row: list = [None] * 16
        acc = row_base
        row[1] = acc
        for val in range(2, 16):
            acc = pt_add(acc, row_base)
            row[val] = acc
        tables.append(row)
        for _ in range(_WINDOW):
            row_base = pt_dbl(row_base)
    return tables


_BASE_TABLE = _build_base_table()


def mul_base(k: int) -> Point:
    """Multiply the generator by k (k reduced mod the group order)."""
    k %= ORDER
    acc: Optional[Point] = None
    table = _BASE_TABLE
    for t in range(_NWIN):
        val = k & 15
        k >>= 4
        if val:
            entry = table[t][val]
            acc = entry if acc is None else pt_add(acc, entry)
        if not k and acc is not None:
            break
    return acc if acc is not None else IDENTITY


def mul(k: int, p: Point) -> Point:
    """Multiply an arbitrary point by k (4-bit window double-and-add)."""
    k %= ORDER
    if k == 0 or pt_is_identity(p):
        return IDENTITY
    table: list = [IDENTITY, p]
    for _ in range(14):
        table.append(pt_add(table[-1], p))
    nibbles = []
    while k:
        nibbles.append(k & 15)
        k >>= 4
    acc: Optional[Point] = None
    for val in reversed(nibbles):
        if acc is not None:
            acc = pt_dbl(pt_dbl(pt_dbl(pt_dbl(acc))))
        if val:
            entry = table[val]
            acc = entry if acc is None else pt_add(acc, entry)
    return acc if acc is not None else IDENTITY


# ── RFC 9496 encoding ────────────────────────────────────────────────────


def decode(data: bytes) -> Point:
    """Decode a canonical 32-byte ristretto255 encoding.

    Raises ValueError on anything that is not the canonical encoding of a
    group element (non-canonical field element, negative s, off-group).
    """
    if len(data) != 32:
        raise ValueError("ristretto255 encoding must be exactly 32 bytes")
    s = int.from_bytes(data, "little")
    if s >= P:
        raise ValueError("non-canonical field element in point encoding")
    if _is_negative(s):
        raise ValueError("invalid point encoding (negative s)")

    ss = s * s % P
    u1 = (1 - ss) % P
    u2 = (1 + ss) % P
    u2_sqr = u2 * u2 % P
    v = (-(D * (u1 * u1 % P)) - u2_sqr) % P

    was_square, invsqrt = _sqrt_ratio_m1(1, v * u2_sqr % P)

    den_x = invsqrt * u2 % P
    den_y = invsqrt * den_x % P * v % P

    x = _abs_fe(2 * s % P * den_x % P)
    y = u1 * den_y % P
    t = x * y % P

    if not was_square or _is_negative(t) or y == 0:
        raise ValueError("invalid point encoding (not on the group)")
    return (x, y, 1, t)


def encode(p: Point) -> bytes:
    """Encode a point to its canonical 32-byte ristretto255 form."""
    x0, y0, z0, t0 = p

    u1 = (z0 + y0) * (z0 - y0) % P
    u2 = x0 * y0 % P
    _, invsqrt = _sqrt_ratio_m1(1, u1 * (u2 * u2 % P) % P)

    den1 = invsqrt * u1 % P
    den2 = invsqrt * u2 % P
    z_inv = den1 * den2 % P * t0 % P

    if _is_negative(t0 * z_inv % P):
        x = y0 * SQRT_M1 % P
        y = x0 * SQRT_M1 % P
        den_inv = den1 * _INVSQRT_A_MINUS_D % P
    else:
        x = x0
        y = y0
        den_inv = den2

    if _is_negative(x * z_inv % P):
        y = P - y if y else 0

    s = _abs_fe(den_inv * ((z0 - y) % P) % P)
    return s.to_bytes(32, "little")
