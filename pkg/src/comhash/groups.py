"""Group backends for the commutative hash: safe-prime multiplicative groups
(mod p) and prime-order elliptic curves in short Weierstrass form.

Both backends expose the same small surface: two independent generators ``g``
and ``h``, ``power`` (exponentiation / scalar multiplication), ``combine``
(the group law), and an exponent modulus that all scalar arithmetic is
reduced by.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple, Union

from .errors import GroupError

Point = Optional[Tuple[int, int]]  # affine coordinates; None is the identity

DEFAULT_H_LABEL = b"comhash/second-generator/v1"

_SMALL_PRIMES = (
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
    71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149,
    151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229,
)


class ModpMode(Enum):
    # SUBGROUP works in the order-q subgroup of squares, so exponent
    # arithmetic mod q is sound (required by the threshold protocol).
    # PRIMITIVE uses primitive roots of order p-1 = 2q.
    SUBGROUP = "subgroup"
    PRIMITIVE = "primitive"


# ---------------------------------------------------------------------------
# scalar arithmetic (exponent domain)
# ---------------------------------------------------------------------------

def scalar_add(u: int, v: int, modulus: int) -> int:
    return (u + v) % modulus


def scalar_sub(u: int, v: int, modulus: int) -> int:
    return (u - v) % modulus


def scalar_mul(u: int, v: int, modulus: int) -> int:
    return (u * v) % modulus


def scalar_neg(u: int, modulus: int) -> int:
    return (-u) % modulus


def scalar_inv(u: int, modulus: int) -> int:
    if u % modulus == 0:
        raise ZeroDivisionError("inverse of zero scalar")
    try:
        return pow(u, -1, modulus)
    except ValueError:
        # composite modulus (PRIMITIVE mode) can have non-units
        raise ZeroDivisionError(f"{u} is not invertible mod {modulus}") from None


def random_scalar(params: "GroupParams", rng: random.Random, nonzero: bool = False) -> int:
    m = params.exponent_modulus
    s = rng.randrange(m)
    while nonzero and s == 0:
        s = rng.randrange(m)
    return s


# ---------------------------------------------------------------------------
# primality
# ---------------------------------------------------------------------------

def is_probable_prime(n: int, rounds: int = 64) -> bool:
    """Miller-Rabin with `rounds` random bases (error < 4**-rounds)."""
    if n < 2:
        return False
    for sp in _SMALL_PRIMES:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n)  # deterministic verdict for a given n
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def sqrt_mod(a: int, p: int) -> Optional[int]:
    """A square root of a mod prime p, or None if a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks for p = 1 mod 4
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


# ---------------------------------------------------------------------------
# parameter types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModpParams:
    """Multiplicative group mod a safe prime, with generator pair (g, h)."""

    modulus: int         # safe prime p = 2q + 1
    subgroup_order: int  # prime q
    g: int
    h: int
    mode: ModpMode = ModpMode.SUBGROUP
    h_label: bytes = field(default=b"", compare=False)  # empty = pinned fixture

    backend = "modp"

    @property
    def exponent_modulus(self) -> int:
        if self.mode is ModpMode.SUBGROUP:
            return self.subgroup_order
        return self.modulus - 1

    @property
    def identity(self) -> int:
        return 1

    def _check(self, el) -> int:
        # cheap structural check on every call; the subgroup-membership test
        # costs a full exponentiation and is done only at deserialization
        if not isinstance(el, int) or isinstance(el, bool):
            raise GroupError(f"modp backend expects int elements, got {type(el).__name__}")
        if not 1 <= el < self.modulus:
            raise GroupError("element out of range")
        return el

    def element_valid(self, el) -> bool:
        if not isinstance(el, int) or isinstance(el, bool) or not 1 <= el < self.modulus:
            return False
        if self.mode is ModpMode.SUBGROUP:
            return pow(el, self.subgroup_order, self.modulus) == 1
        return True

    def power(self, base: int, exponent: int) -> int:
        self._check(base)
        return pow(base, exponent % self.exponent_modulus, self.modulus)

    def combine(self, e1: int, e2: int) -> int:
        self._check(e1)
        self._check(e2)
        return e1 * e2 % self.modulus


@dataclass(frozen=True)
class EcParams:
    """Prime-order elliptic curve y^2 = x^3 + ax + b over GF(p)."""

    name: str
    field_prime: int
    curve_a: int
    curve_b: int
    order: int               # prime number of points, including the identity
    g: Tuple[int, int]
    h: Tuple[int, int]
    h_label: bytes = field(default=b"", compare=False)

    backend = "ec"

    @property
    def exponent_modulus(self) -> int:
        return self.order

    @property
    def identity(self) -> Point:
        return None

    def on_curve(self, pt: Point) -> bool:
        if pt is None:
            return True
        x, y = pt
        p = self.field_prime
        if not (0 <= x < p and 0 <= y < p):
            return False
        return (y * y - (x * x * x + self.curve_a * x + self.curve_b)) % p == 0

    def _check(self, pt) -> Point:
        if pt is None:
            return None
        if (not isinstance(pt, tuple) or len(pt) != 2
                or not all(isinstance(c, int) for c in pt)):
            raise GroupError(f"ec backend expects (x, y) points, got {type(pt).__name__}")
        return pt

    def element_valid(self, pt) -> bool:
        if pt is None:
            return True
        if not isinstance(pt, tuple) or len(pt) != 2:
            return False
        return self.on_curve(pt)

    def power(self, base: Point, exponent: int) -> Point:
        self._check(base)
        return _ec_mul(self, base, exponent % self.order)

    def combine(self, p1: Point, p2: Point) -> Point:
        return _ec_add(self, self._check(p1), self._check(p2))


GroupParams = Union[ModpParams, EcParams]


# ---------------------------------------------------------------------------
# elliptic curve arithmetic
# ---------------------------------------------------------------------------

def _ec_add(params: EcParams, p1: Point, p2: Point) -> Point:
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    p = params.field_prime
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        return _ec_double(params, p1)
    lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _ec_double(params: EcParams, pt: Point) -> Point:
    if pt is None:
        return None
    p = params.field_prime
    x, y = pt
    if y == 0:
        return None
    lam = (3 * x * x + params.curve_a) * pow(2 * y, -1, p) % p
    x3 = (lam * lam - 2 * x) % p
    return (x3, (lam * (x - x3) - y) % p)


def _ec_mul(params: EcParams, pt: Point, k: int) -> Point:
    """Scalar multiplication via Jacobian coordinates (one inversion total)."""
    if pt is None or k == 0:
        return None
    p, a = params.field_prime, params.curve_a
    xa, ya = pt[0] % p, pt[1] % p
    # accumulate in Jacobian (X, Y, Z); Z == 0 is the identity
    X, Y, Z = 0, 1, 0
    for bit in bin(k)[2:]:
        X, Y, Z = _jac_double(X, Y, Z, p, a)
        if bit == "1":
            X, Y, Z = _jac_add_affine(X, Y, Z, xa, ya, p, a)
    if Z == 0:
        return None
    zinv = pow(Z, -1, p)
    z2 = zinv * zinv % p
    return (X * z2 % p, Y * z2 % p * zinv % p)


def _jac_double(X, Y, Z, p, a):
    if Z == 0 or Y == 0:
        return (0, 1, 0)
    Y2 = Y * Y % p
    S = 4 * X * Y2 % p
    Z2 = Z * Z % p
    M = (3 * X * X + a * Z2 * Z2) % p
    X3 = (M * M - 2 * S) % p
    Y3 = (M * (S - X3) - 8 * Y2 * Y2) % p
    return (X3, Y3, 2 * Y * Z % p)


def _jac_add_affine(X, Y, Z, xa, ya, p, a):
    # mixed addition: second operand affine (Z2 = 1)
    if Z == 0:
        return (xa, ya, 1)
    Z2 = Z * Z % p
    U2 = xa * Z2 % p
    S2 = ya * Z2 * Z % p
    if U2 == X % p:
        if S2 != Y % p:
            return (0, 1, 0)
        return _jac_double(X, Y, Z, p, a)
    H = (U2 - X) % p
    R = (S2 - Y) % p
    H2 = H * H % p
    H3 = H2 * H % p
    X3 = (R * R - H3 - 2 * X * H2) % p
    Y3 = (R * (X * H2 - X3) - Y * H3) % p
    return (X3, Y3, Z * H % p)


# ---------------------------------------------------------------------------
# fixed parameter sets
# ---------------------------------------------------------------------------

# RFC 3526 MODP groups: p is a safe prime and 2 generates the order-q
# subgroup of squares.
_RFC3526_2048 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
    16,
)
_RFC3526_3072 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
    "3995497CEA956AE515D2261898FA051015728E5A8AAAC42DAD33170D04507A33"
    "A85521ABDF1CBA64ECFB850458DBEF0A8AEA71575D060C7DB3970F85A6E1E4C7"
    "ABF5AE8CDB0933D71E8C94E04A25619DCEE3D2261AD2EE6BF12FFA06D98A0864"
    "D87602733EC86A64521F2B18177B200CBBE117577A615D6C770988C0BAD946E2"
    "08E24FA074E5AB3143DB5BFCE0FD108E4B82D120A93AD2CAFFFFFFFFFFFFFFFF",
    16,
)

_SECP256K1_P = 2**256 - 2**32 - 977
_SECP256K1_N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_SECP256K1_G = (
    0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
)

_CURVE_REGISTRY = {
    "secp256k1": dict(field_prime=_SECP256K1_P, curve_a=0, curve_b=7, order=_SECP256K1_N),
    # tiny curve with a prime number of points (19), for exhaustive tests
    "toy17": dict(field_prime=17, curve_a=2, curve_b=2, order=19),
}

_TOY17_G = (5, 1)


def curve_registry() -> dict:
    return {name: dict(spec) for name, spec in _CURVE_REGISTRY.items()}


def toy_modp_subgroup() -> ModpParams:
    """p=23 fixture in subgroup mode; 2 and 3 both have order 11."""
    return ModpParams(modulus=23, subgroup_order=11, g=2, h=3, mode=ModpMode.SUBGROUP)


def toy_modp_primitive() -> ModpParams:
    """p=23 fixture with primitive roots 5 and 7 (order 22)."""
    return ModpParams(modulus=23, subgroup_order=11, g=5, h=7, mode=ModpMode.PRIMITIVE)


def toy_ec(h_label: bytes = DEFAULT_H_LABEL) -> EcParams:
    spec = _CURVE_REGISTRY["toy17"]
    partial = EcParams(name="toy17", g=_TOY17_G, h=_TOY17_G, **spec)
    return replace(partial, h=derive_second_generator(partial, h_label), h_label=h_label)


def secp256k1(h_label: bytes = DEFAULT_H_LABEL) -> EcParams:
    spec = _CURVE_REGISTRY["secp256k1"]
    partial = EcParams(name="secp256k1", g=_SECP256K1_G, h=_SECP256K1_G, **spec)
    return replace(partial, h=derive_second_generator(partial, h_label), h_label=h_label)


def modp_group(bits: int, mode: ModpMode = ModpMode.SUBGROUP,
               h_label: bytes = DEFAULT_H_LABEL) -> ModpParams:
    """The fixed RFC 3526 group of the requested size (2048 or 3072 bits)."""
    try:
        p = {2048: _RFC3526_2048, 3072: _RFC3526_3072}[bits]
    except KeyError:
        raise GroupError(f"no fixed modp group of {bits} bits") from None
    q = (p - 1) // 2
    if mode is ModpMode.SUBGROUP:
        g = 2  # known square for these moduli
    else:
        g = _smallest_primitive_root(p, q)
    partial = ModpParams(modulus=p, subgroup_order=q, g=g, h=g, mode=mode)
    return replace(partial, h=derive_second_generator(partial, h_label), h_label=h_label)


# ---------------------------------------------------------------------------
# generation / derivation / validation
# ---------------------------------------------------------------------------

def _smallest_primitive_root(p: int, q: int) -> int:
    for c in range(2, p):
        if pow(c, 2, p) != 1 and pow(c, q, p) != 1:
            return c
    raise GroupError("no primitive root found")  # impossible for a safe prime


def _expand(seed_bytes: bytes, width: int) -> bytes:
    out = hashlib.sha256(seed_bytes).digest()
    while len(out) < width:
        out += hashlib.sha256(out).digest()
    return out[:width]


def derive_second_generator(params: GroupParams, label: bytes) -> Union[int, Tuple[int, int]]:
    """Deterministically hash a public label to a second generator.

    Counter-based rejection sampling; nobody learns the discrete log of the
    result with respect to ``g``.
    """
    if not label:
        raise GroupError("label must be non-empty")
    if isinstance(params, ModpParams):
        p, q = params.modulus, params.subgroup_order
        width = (p.bit_length() + 7) // 8
        for ctr in range(10000):
            c = int.from_bytes(
                _expand(b"comhash/h2g/modp/" + label + b"/" + ctr.to_bytes(4, "big"), width),
                "big") % p
            if params.mode is ModpMode.SUBGROUP:
                cand = c * c % p  # squaring lands in the order-q subgroup
                if cand not in (0, 1):
                    return cand
            else:
                if c > 1 and pow(c, 2, p) != 1 and pow(c, q, p) != 1:
                    return c
        raise GroupError("second-generator derivation exhausted its retries")
    p = params.field_prime
    width = (p.bit_length() + 7) // 8
    for ctr in range(10000):
        x = int.from_bytes(
            _expand(b"comhash/h2g/ec/" + label + b"/" + ctr.to_bytes(4, "big"), width),
            "big") % p
        rhs = (x * x * x + params.curve_a * x + params.curve_b) % p
        y = sqrt_mod(rhs, p)
        if y is None:
            continue
        if y % 2 == 1:
            y = p - y  # canonical even-y root
        return (x, y)
    raise GroupError("second-generator derivation exhausted its retries")


def generate_group(backend: str, security_bits: int, seed=None,
                   mode: ModpMode = ModpMode.SUBGROUP,
                   h_label: bytes = DEFAULT_H_LABEL) -> GroupParams:
    """Produce group parameters of the requested size, deterministic per seed.

    modp: 5 bits returns the p=23 fixture, 6..512 bits runs a seeded
    safe-prime search, 2048/3072 return the fixed standard groups.
    ec: sizes up to 8 bits return the toy curve, 256 returns secp256k1.
    """
    if backend == "ec":
        if security_bits <= 8:
            return toy_ec(h_label)
        if security_bits == 256:
            return secp256k1(h_label)
        raise GroupError(f"unsupported ec size: {security_bits}")
    if backend != "modp":
        raise GroupError(f"unknown backend: {backend!r}")
    if security_bits == 5:
        return toy_modp_subgroup() if mode is ModpMode.SUBGROUP else toy_modp_primitive()
    if security_bits in (2048, 3072):
        return modp_group(security_bits, mode, h_label)
    if not 6 <= security_bits <= 512:
        raise GroupError(f"unsupported modp size: {security_bits}")

    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    for _ in range(200000):
        q = rng.randrange(1 << (security_bits - 2), 1 << (security_bits - 1)) | 1
        p = 2 * q + 1
        if p.bit_length() != security_bits:
            continue
        if any(q % sp == 0 or p % sp == 0 for sp in _SMALL_PRIMES if sp < q):
            continue
        if is_probable_prime(q) and is_probable_prime(p):
            root = _smallest_primitive_root(p, q)
            g = root * root % p if mode is ModpMode.SUBGROUP else root
            partial = ModpParams(modulus=p, subgroup_order=q, g=g, h=g, mode=mode)
            return replace(partial, h=derive_second_generator(partial, h_label),
                           h_label=h_label)
    raise GroupError("safe-prime search exhausted its attempt budget")


def validate_group(params: GroupParams, rounds: int = 64) -> list[str]:
    """Check every structural invariant; returns a list of violations (empty = ok)."""
    problems: list[str] = []
    if isinstance(params, ModpParams):
        p, q = params.modulus, params.subgroup_order
        if not is_probable_prime(p, rounds):
            problems.append("p not prime")
        if not is_probable_prime(q, rounds):
            problems.append("q not prime")
        if p != 2 * q + 1:
            problems.append("p != 2q + 1")
        for name, gen in (("g", params.g), ("h", params.h)):
            if not 1 < gen < p:
                problems.append(f"{name} out of range")
                continue
            if params.mode is ModpMode.SUBGROUP:
                if pow(gen, q, p) != 1 or gen == 1:
                    problems.append(f"{name} has wrong order")
            else:
                if pow(gen, 2, p) == 1 or pow(gen, q, p) == 1:
                    problems.append(f"{name} has wrong order")
        if params.h_label and not problems:
            if derive_second_generator(params, params.h_label) != params.h:
                problems.append("h does not match its derivation label")
        return problems

    p, n = params.field_prime, params.order
    if not is_probable_prime(p, rounds):
        problems.append("field prime not prime")
    if not is_probable_prime(n, rounds):
        problems.append("group order not prime")
    # group order must sit in the Hasse interval of the field size
    root = _isqrt(p)
    if not (p + 1 - 2 * (root + 1)) <= n <= (p + 1 + 2 * (root + 1)):
        problems.append("group order outside the Hasse interval")
    for name, pt in (("base point g", params.g), ("base point h", params.h)):
        if pt is None:
            problems.append(f"{name} is the identity")
        elif not params.on_curve(pt):
            problems.append(f"{name} not on curve")
        elif not problems and params.power(pt, n) is not None:
            problems.append(f"{name} order does not divide the group order")
    if params.h_label and not problems:
        if derive_second_generator(params, params.h_label) != params.h:
            problems.append("h does not match its derivation label")
    return problems


def _isqrt(n: int) -> int:
    import math
    return math.isqrt(n)
