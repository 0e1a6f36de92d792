import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comhash import AuthenticationError, EncodingError
from comhash import pke


def test_keypair_public_is_g_to_secret(toy_subgroup):
    kp = pke.KeyPair(secret=4, public=toy_subgroup.power(toy_subgroup.g, 4))
    assert kp.public == 16  # 2^4 mod 23
    generated = pke.generate_keypair(toy_subgroup, rng=random.Random(1))
    assert generated.public == toy_subgroup.power(toy_subgroup.g, generated.secret)


def test_distinct_seeds_distinct_secrets(secp):
    a = pke.generate_keypair(secp, rng=random.Random(1))
    b = pke.generate_keypair(secp, rng=random.Random(2))
    assert a.secret != b.secret


def test_secret_never_zero(toy_subgroup):
    # exponent modulus 11: small enough that zero draws actually happen
    for seed in range(200):
        kp = pke.generate_keypair(toy_subgroup, rng=random.Random(seed))
        assert 1 <= kp.secret < 11
        assert kp.public != toy_subgroup.identity


@pytest.mark.parametrize("which", ["toy_subgroup", "toy_primitive", "toy_curve", "secp"])
def test_round_trip_nonce(which, request):
    params = request.getfixturevalue(which)
    kp = pke.generate_keypair(params, rng=random.Random(5))
    nonce = random.Random(6).randbytes(32)
    ct = pke.encrypt(params, kp.public, nonce, rng=random.Random(7))
    assert pke.decrypt(params, kp.secret, ct) == nonce


def test_flipped_body_bit_fails_tag(toy_subgroup):
    kp = pke.generate_keypair(toy_subgroup, rng=random.Random(1))
    ct = pke.encrypt(toy_subgroup, kp.public, b"\x00" * 32, rng=random.Random(2))
    bad = pke.Ciphertext(ct.ephemeral, bytes([ct.body[0] ^ 0x80]) + ct.body[1:], ct.tag)
    with pytest.raises(AuthenticationError):
        pke.decrypt(toy_subgroup, kp.secret, bad)


def test_encryption_is_randomized(toy_subgroup):
    kp = pke.generate_keypair(toy_subgroup, rng=random.Random(1))
    c1 = pke.encrypt(toy_subgroup, kp.public, b"same", rng=random.Random(10))
    c2 = pke.encrypt(toy_subgroup, kp.public, b"same", rng=random.Random(11))
    assert c1 != c2


def test_every_single_byte_corruption_rejected(secp):
    kp = pke.generate_keypair(secp, rng=random.Random(3))
    ct = pke.encrypt(secp, kp.public, b"short and sweet", rng=random.Random(4))
    encoded = pke.ciphertext_to_bytes(secp, ct)
    for i in range(len(encoded)):
        corrupted = bytearray(encoded)
        corrupted[i] ^= 0x01
        try:
            parsed = pke.ciphertext_from_bytes(secp, bytes(corrupted))
        except EncodingError:
            continue  # ephemeral no longer decodes: also a rejection
        with pytest.raises(AuthenticationError):
            pke.decrypt(secp, kp.secret, parsed)


@settings(max_examples=60, deadline=None)
@given(plaintext=st.binary(min_size=0, max_size=200), seed=st.integers(0, 2**31))
def test_round_trip_random(plaintext, seed, toy_curve):
    kp = pke.generate_keypair(toy_curve, rng=random.Random(seed))
    ct = pke.encrypt(toy_curve, kp.public, plaintext, rng=random.Random(seed + 1))
    assert pke.decrypt(toy_curve, kp.secret, ct) == plaintext


def test_round_trip_1000_random(toy_subgroup, rng):
    for _ in range(1000):
        kp = pke.generate_keypair(toy_subgroup, rng)
        plaintext = rng.randbytes(rng.randrange(0, 64))
        ct = pke.encrypt(toy_subgroup, kp.public, plaintext, rng)
        assert pke.decrypt(toy_subgroup, kp.secret, ct) == plaintext


def test_ciphertext_encoding_round_trip(toy_curve):
    kp = pke.generate_keypair(toy_curve, rng=random.Random(8))
    ct = pke.encrypt(toy_curve, kp.public, b"x" * 32, rng=random.Random(9))
    encoded = pke.ciphertext_to_bytes(toy_curve, ct)
    assert pke.ciphertext_from_bytes(toy_curve, encoded) == ct
    with pytest.raises(EncodingError):
        pke.ciphertext_from_bytes(toy_curve, encoded[:-1])
    with pytest.raises(EncodingError):
        pke.ciphertext_from_bytes(toy_curve, encoded + b"\x00")
    with pytest.raises(EncodingError):
        pke.ciphertext_from_bytes(toy_curve, b"")


def test_plaintext_length_cap(toy_subgroup):
    kp = pke.generate_keypair(toy_subgroup, rng=random.Random(1))
    with pytest.raises(ValueError):
        pke.encrypt(toy_subgroup, kp.public, b"\x00" * 65536, rng=random.Random(2))
