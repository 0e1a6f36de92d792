"""Hashed-ElGamal public-key encryption over the protocol's own group.

Used for the encrypted nonce receipts: the KEM shared point is hashed into a
stream/MAC key, so the only hardness assumption stays the discrete log in
the group already in use. SHA-256 drives both the keystream (counter mode)
and the authentication tag (HMAC, truncated to 16 bytes).
"""

from __future__ import annotations

import hashlib
import hmac
import random
import struct
from dataclasses import dataclass

from .encoding import element_byte_length, element_to_bytes
from .errors import AuthenticationError, EncodingError
from .groups import GroupParams

TAG_LENGTH = 16
MAX_PLAINTEXT = 0xFFFF  # body length travels as u16


@dataclass(frozen=True)
class KeyPair:
    secret: int
    public: object  # group element


@dataclass(frozen=True)
class Ciphertext:
    ephemeral: object  # group element, never the identity
    body: bytes
    tag: bytes


def _rng(rng) -> random.Random:
    if rng is None:
        return random.SystemRandom()
    if isinstance(rng, random.Random):
        return rng
    return random.Random(rng)


def generate_keypair(params: GroupParams, rng=None) -> KeyPair:
    rng = _rng(rng)
    m = params.exponent_modulus
    secret = 0
    while secret == 0:  # zero would publish the identity
        secret = rng.randrange(m)
    return KeyPair(secret=secret, public=params.power(params.g, secret))


def _derive_key(params: GroupParams, shared) -> bytes:
    return hashlib.sha256(b"comhash/kem/v1" + element_to_bytes(params, shared)).digest()


def _keystream(key: bytes, length: int) -> bytes:
    out = b""
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(key + b"/stream/" + struct.pack("!I", counter)).digest()
        counter += 1
    return out[:length]


def _tag(params: GroupParams, key: bytes, ephemeral, body: bytes) -> bytes:
    msg = element_to_bytes(params, ephemeral) + body
    return hmac.new(key, msg, hashlib.sha256).digest()[:TAG_LENGTH]


def encrypt(params: GroupParams, public, plaintext: bytes, rng=None) -> Ciphertext:
    if len(plaintext) > MAX_PLAINTEXT:
        raise ValueError("plaintext too long")
    rng = _rng(rng)
    m = params.exponent_modulus
    e = 0
    while e == 0:
        e = rng.randrange(m)
    ephemeral = params.power(params.g, e)
    key = _derive_key(params, params.power(public, e))
    body = bytes(a ^ b for a, b in zip(plaintext, _keystream(key, len(plaintext))))
    return Ciphertext(ephemeral=ephemeral, body=body,
                      tag=_tag(params, key, ephemeral, body))


def decrypt(params: GroupParams, secret: int, ct: Ciphertext) -> bytes:
    key = _derive_key(params, params.power(ct.ephemeral, secret))
    expected = _tag(params, key, ct.ephemeral, ct.body)
    if not hmac.compare_digest(expected, ct.tag):
        raise AuthenticationError("ciphertext tag mismatch")
    return bytes(a ^ b for a, b in zip(ct.body, _keystream(key, len(ct.body))))


def ciphertext_to_bytes(params: GroupParams, ct: Ciphertext) -> bytes:
    return (element_to_bytes(params, ct.ephemeral)
            + struct.pack("!H", len(ct.body)) + ct.body + ct.tag)


def ciphertext_from_bytes(params: GroupParams, data: bytes) -> Ciphertext:
    from .encoding import element_from_bytes

    width = element_byte_length(params)
    if len(data) < width + 2 + TAG_LENGTH:
        raise EncodingError("ciphertext too short")
    ephemeral = element_from_bytes(params, data[:width])
    if ephemeral is None or ephemeral == params.identity:
        raise EncodingError("ephemeral element cannot be the identity")
    (body_len,) = struct.unpack("!H", data[width:width + 2])
    if len(data) != width + 2 + body_len + TAG_LENGTH:
        raise EncodingError("ciphertext length mismatch")
    body = data[width + 2:width + 2 + body_len]
    return Ciphertext(ephemeral=ephemeral, body=body, tag=data[width + 2 + body_len:])
