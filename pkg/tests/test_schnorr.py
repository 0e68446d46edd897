import random

import pytest

from esem import groupmath as gm
from esem import schnorr
from esem.errors import DecodeError
from esem.groupmath import OpCounter, Scalar
from esem.kdf import schnorr_challenge


@pytest.fixture(scope="module")
def keypair():
    return schnorr.keygen(random.Random(31337))


def test_keygen_structure(rng):
    kp1 = schnorr.keygen(rng)
    kp2 = schnorr.keygen(rng)
    assert kp1.y != kp2.y
    assert not kp1.y.is_zero()
    assert kp1.Y == gm.mul_basepoint(kp1.y)


def test_sign_verify_many_messages(keypair, rng):
    for i in range(1000):
        m = rng.getrandbits(256).to_bytes(32, "little") + i.to_bytes(4, "big")
        sig = schnorr.sign(m, keypair.y, rng)
        assert schnorr.verify(m, sig, keypair.Y)


def test_tampered_message_rejected(keypair, rng):
    m = b"original message"
    sig = schnorr.sign(m, keypair.y, rng)
    tampered = bytearray(m)
    tampered[3] ^= 0x10
    assert not schnorr.verify(bytes(tampered), sig, keypair.Y)


def test_tampered_signature_rejected(keypair, rng):
    m = b"message"
    sig = schnorr.sign(m, keypair.y, rng)
    assert not schnorr.verify(m, schnorr.SchnorrSignature(gm.scalar_add(sig.s, Scalar(1)), sig.e), keypair.Y)
    assert not schnorr.verify(m, schnorr.SchnorrSignature(sig.s, gm.scalar_add(sig.e, Scalar(1))), keypair.Y)


def test_wrong_public_key_rejected(keypair, rng):
    other = schnorr.keygen(rng)
    sig = schnorr.sign(b"m", keypair.y, rng)
    assert not schnorr.verify(b"m", sig, other.Y)


def test_fresh_nonce_per_signature(keypair, rng):
    sigs = {schnorr.sign(b"same message", keypair.y, rng).to_bytes() for _ in range(50)}
    assert len(sigs) == 50


def test_single_bit_flips_flip_verification(keypair):
    rng = random.Random(77)
    for _ in range(1000):
        m = rng.getrandbits(128).to_bytes(16, "little")
        sig = schnorr.sign(m, keypair.y, rng)
        blob = bytearray(sig.to_bytes() + m)
        bit = rng.randrange(len(blob) * 8)
        blob[bit // 8] ^= 1 << (bit % 8)
        sig_part, m_part = bytes(blob[:64]), bytes(blob[64:])
        try:
            mutated = schnorr.SchnorrSignature.from_bytes(sig_part)
        except DecodeError:
            continue  # non-canonical scalar: rejected at the decode boundary
        assert not schnorr.verify(m_part, mutated, keypair.Y)


def test_signature_wire_format(keypair, rng):
    sig = schnorr.sign(b"m", keypair.y, rng)
    blob = sig.to_bytes()
    assert len(blob) == 64
    assert schnorr.SchnorrSignature.from_bytes(blob) == sig
    with pytest.raises(DecodeError):
        schnorr.SchnorrSignature.from_bytes(blob[:63])


def test_op_profile_single_fixed_base_mult(keypair, rng):
    ops = OpCounter()
    schnorr.sign(b"m", keypair.y, rng, ops)
    assert ops.fixed_base_mults == 1
    assert ops.var_base_mults == 0
    assert ops.point_adds == 0
    assert ops.scalar_mults == 1


def test_extract_key_from_nonce_reuse(keypair):
    # Build two same-nonce signatures directly from the equations.
    rng = random.Random(5)
    r = gm.random_scalar(rng)
    R = gm.mul_basepoint(r)
    for m1, m2 in [(b"first", b"second"), (b"a", b"b")]:
        e1 = schnorr_challenge(m1, R.to_bytes())
        e2 = schnorr_challenge(m2, R.to_bytes())
        s1 = gm.scalar_sub(r, gm.scalar_mul(e1, keypair.y))
        s2 = gm.scalar_sub(r, gm.scalar_mul(e2, keypair.y))
        recovered = schnorr.extract_key((s1, e1), (s2, e2))
        assert recovered == keypair.y
        assert gm.mul_basepoint(recovered) == keypair.Y


def test_extract_key_rejects_singular_system(keypair):
    s, e = Scalar(4), Scalar(9)
    with pytest.raises(ValueError):
        schnorr.extract_key((s, e), (Scalar(5), e))
